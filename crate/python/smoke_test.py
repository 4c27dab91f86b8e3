"""Smoke test for the pywpda extension.

Build it first with `cargo build -p wpda-py`, then run this script from the
repository root. Pass a path to the shared library to test a different build.
"""

import importlib.machinery
import importlib.util
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def find_library():
    if len(sys.argv) > 1:
        return Path(sys.argv[1])
    for profile in ("release", "debug"):
        for name in ("libpywpda.so", "libpywpda.dylib", "pywpda.dll"):
            path = ROOT / "target" / profile / name
            if path.exists():
                return path
    sys.exit("pywpda library not found; run `cargo build -p wpda-py` first")


def load(path):
    loader = importlib.machinery.ExtensionFileLoader("pywpda", str(path))
    spec = importlib.util.spec_from_loader("pywpda", loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def main():
    pywpda = load(find_library())

    p = pywpda.p1()
    assert p.classify()["is_normal_form_bu"]
    assert p.stringsum("ab") == 0.25
    assert p.stringsum("aabb", algo="bu-basic") == 0.0625
    assert p.stringsum("aab") == 0.0
    assert abs(p.runsum() - 1 / 3) < 1e-10
    value, complete = p.oracle("aabb")
    assert complete and value == 0.0625

    q = pywpda.Wpda.from_json(p.to_json())
    assert q.to_json() == p.to_json()
    td = q.normal_form("top-down")
    assert td.classify()["is_normal_form_td"]
    assert abs(td.stringsum("aabb", algo="td") - 0.0625) < 1e-12

    d = pywpda.dyck1("boolean")
    assert d.stringsum("(())", algo="lang") == 1.0
    assert d.stringsum("(()", algo="lang") == 0.0

    try:
        p.stringsum("ab", algo="nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown algorithm accepted")

    print("pywpda smoke test passed:", repr(p))


if __name__ == "__main__":
    main()
