"""Builds the _transa extension by driving the project's CMake configuration.

The system cmake binary is required. Use `pip install -e . --no-build-isolation`.
"""

import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        out_dir = Path(self.get_ext_fullpath(ext.name)).resolve().parent
        out_dir.mkdir(parents=True, exist_ok=True)
        build_dir = Path(self.build_temp) / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        source_dir = Path(__file__).resolve().parent
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DTRANSA_BUILD_TESTS=OFF",
                "-DTRANSA_BUILD_CLI=OFF",
                f"-DPython3_EXECUTABLE={sys.executable}",
                f"-DTRANSA_PYTHON_OUTPUT_DIR={out_dir}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_transa", "--parallel"],
            check=True,
        )


setup(
    ext_modules=[CMakeExtension("transa._transa")],
    cmdclass={"build_ext": CMakeBuild},
)
