"""Builds the _formeval extension by compiling the C++ core directly.

The CMake build remains the primary workflow (it also produces the CLI and
the test binaries); this setup exists so the python package can be installed
with plain pip.
"""

import pathlib
from glob import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ROOT = pathlib.Path(__file__).parent


def embed_criteria() -> str:
    """Generates the header that bakes data/criteria.json into the library,
    mirroring cmake/embed_file.cmake."""
    data = (ROOT / "data" / "criteria.json").read_bytes()
    out_dir = ROOT / "build" / "pip_generated"
    out_dir.mkdir(parents=True, exist_ok=True)
    body = ""
    for i, byte in enumerate(data, start=1):
        body += f"0x{byte:02x},"
        if i % 16 == 0:
            body += "\n    "
    header = (
        "// Generated from data/criteria.json. Do not edit.\n"
        "#pragma once\n\n"
        "inline constexpr unsigned char kCriteriaJsonBytes[] = {\n"
        f"    {body}\n}};\n"
    )
    target = out_dir / "criteria_embedded.hpp"
    if not target.exists() or target.read_text() != header:
        target.write_text(header)
    return str(out_dir)


ext = Pybind11Extension(
    "formeval._formeval",
    sorted(glob("src/*.cpp")) + ["bindings/pybind_module.cpp"],
    include_dirs=["include", "vendor", embed_criteria()],
    libraries=["ssl", "crypto"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
