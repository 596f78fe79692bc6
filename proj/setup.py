"""Builds the _evp extension by delegating to the project's CMake build.

The CMake project is the single source of truth for sources and flags; this
file only configures it with EVP_BUILD_PYTHON=ON and copies the resulting
module into the evp package.
"""

import shutil
import subprocess
import sys
from pathlib import Path

import pybind11
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp) / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        subprocess.run(
            [
                "cmake",
                str(source_dir),
                "-DEVP_BUILD_PYTHON=ON",
                "-DEVP_BUILD_TESTS=OFF",
                f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
                f"-DPython_EXECUTABLE={sys.executable}",
                "-DCMAKE_BUILD_TYPE=Release",
            ],
            cwd=build_dir,
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", ".", "--target", "_evp", "--parallel"],
            cwd=build_dir,
            check=True,
        )
        modules = list(build_dir.glob("_evp*.so"))
        if len(modules) != 1:
            raise RuntimeError(f"expected one _evp module, found {modules}")
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(modules[0], dest)


setup(
    ext_modules=[CMakeExtension("evp._evp")],
    cmdclass={"build_ext": CMakeBuild},
)
