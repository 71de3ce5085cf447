import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "basisrisk._core",
    sorted(glob.glob("src/*.cpp")) + ["python/bindings.cpp"],
    include_dirs=["include", "vendor"],
    cxx_std=20,
    extra_link_args=["-pthread"],
)

setup(
    ext_modules=[ext],
    cmdclass={"build_ext": build_ext},
    packages=["basisrisk"],
    package_dir={"basisrisk": "python/basisrisk"},
)
