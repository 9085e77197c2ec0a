"""Regenerate the frozen high-precision reference values used by the tests.

Requires mpmath (not a runtime dependency). Run from the repo root:

    python tools/make_oracle_tables.py
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50
DIGITS = 32
OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "oracle.json"


def s(v):
    return mp.nstr(v, DIGITS)


def schmidt_number(eta):
    eta = mp.mpf(eta)
    return eta / (2 * mp.sqrt(mp.pi)) * mp.exp(-4 / eta**2) / mp.erfc(2 / eta)


def main():
    xs = [mp.mpf(0)]
    # dense on [0, 5], then log-spaced out to 1e8
    xs += [mp.mpf(i) / 8 for i in range(1, 41)]
    xs += [mp.mpf(10) ** (mp.mpf(e) / 4) for e in range(3, 33)]
    xs += [mp.mpf("0.2"), mp.mpf("1.4999"), mp.mpf("1.5"), mp.mpf("26")]
    # abscissae are snapped to doubles so tests evaluate exactly the tabulated point
    xs = sorted({mp.mpf(float(x)) for x in xs})
    erfcx_rows = [[s(x), s(mp.exp(x**2) * mp.erfc(x))] for x in xs]

    erf_xs = [mp.mpf(float(mp.mpf(i) / 10)) for i in range(-60, 61)]
    erf_rows = [[s(x), s(mp.erf(x)), s(mp.erfc(x))] for x in erf_xs]
    erfc_tail = [[s(x), s(mp.erfc(x))] for x in [mp.mpf(v) for v in (2, 5, 10, 15, 20, 25, 26)]]

    etas = ["0.1", "0.5", "1", "2", "5", "10", "20", "50", "100", "1000", "4500", "1e-6"]
    k_rows = {e: s(schmidt_number(e)) for e in etas}

    data = {
        "erfcx": erfcx_rows,
        "erf_erfc": erf_rows,
        "erfc_tail": erfc_tail,
        "schmidt_number_exact": k_rows,
    }
    OUT.write_text(json.dumps(data, indent=1) + "\n")
    print(f"wrote {OUT} ({len(erfcx_rows)} erfcx points)")


if __name__ == "__main__":
    main()
