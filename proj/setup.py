"""CMake-backed build for the python extension.

The extension is a normal CMake target; this shim points setuptools at it so
`pip install -e . --no-build-isolation` works without extra build backends.
"""

import os
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
        source_dir = Path(__file__).resolve().parent
        ext_dir = Path(self.get_ext_fullpath(ext.name)).resolve().parent
        build_dir = Path(self.build_temp) / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        configure = [
            "cmake",
            str(source_dir),
            "-DRSD_PIP_BUILD=ON",
            "-DRSD_BUILD_PYTHON=ON",
            f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={ext_dir}",
            f"-DPYTHON_EXECUTABLE={sys.executable}",
            "-DCMAKE_BUILD_TYPE=Release",
        ]
        subprocess.run(configure, cwd=build_dir, check=True)
        jobs = str(os.cpu_count() or 2)
        subprocess.run(
            ["cmake", "--build", ".", "--target", "_core", "--parallel", jobs],
            cwd=build_dir,
            check=True,
        )


setup(
    packages=["rsd"],
    package_dir={"rsd": "python/rsd"},
    ext_modules=[CMakeExtension("rsd._core")],
    cmdclass={"build_ext": CMakeBuild},
    zip_safe=False,
)
