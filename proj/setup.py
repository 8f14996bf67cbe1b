"""Builds the pybind11 extension through the project's CMake tree."""

import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source = Path(__file__).resolve().parent
        build = Path(self.build_temp).resolve()
        build.mkdir(parents=True, exist_ok=True)
        subprocess.run(
            [
                "cmake",
                "-S", str(source),
                "-B", str(build),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DDENSEHMM_BUILD_PYTHON=ON",
                "-DDENSEHMM_BUILD_CLI=OFF",
                "-DDENSEHMM_BUILD_TESTS=OFF",
                f"-DPython_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build), "--target", "_densehmm"], check=True
        )
        staged = sorted((build / "python" / "densehmm").glob("_densehmm*"))
        if not staged:
            raise RuntimeError("CMake did not produce the _densehmm extension")
        dest = Path(self.get_ext_fullpath(ext.name)).resolve()
        dest.parent.mkdir(parents=True, exist_ok=True)
        self.copy_file(str(staged[0]), str(dest))


setup(
    ext_modules=[CMakeExtension("densehmm._densehmm")],
    cmdclass={"build_ext": CMakeBuild},
)
