from __future__ import annotations

from pathlib import Path

import pytest

SAMPLES = Path(__file__).resolve().parents[1] / "src" / "checkedc_compat" / "samples"

FREAD_NATIVE = """size_t fread(void *p : byte_count(size * nmemb),
  size_t size, size_t nmemb,
  FILE *stream : itype(ptr<FILE>));
"""

FREAD_MACRO = """size_t fread(void *p abyte_count(size * nmemb),
  size_t size, size_t nmemb,
  FILE *stream atype(ptr(FILE)));
"""

FREAD_LEGACY = "size_t fread(void *p, size_t size, size_t nmemb, FILE *stream);"

PTR_MACRO_DEF = """#ifdef USE_CHECKEDC
#define ptr(t) _Ptr<t>
#else
#define ptr(t) t *
#endif
"""


@pytest.fixture
def samples() -> Path:
    return SAMPLES
