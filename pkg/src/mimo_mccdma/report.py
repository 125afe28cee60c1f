"""CSV emission for BER sweeps and constellation tables."""

from __future__ import annotations

import csv
import io
from typing import Iterable

from .link import BerRecord
from .modem import ModScheme

CSV_HEADER = ("modulation", "snr_db", "eb_n0_db", "bits", "errors", "ber", "trials")


def _num(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else f"{x:.6g}"


def results_csv(records: Iterable[BerRecord]) -> str:
    """Rows sorted by (modulation, snr_db); ``ber`` with 6 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in sorted(records, key=lambda r: (r.modulation, r.snr_db)):
        w.writerow(
            [r.modulation, _num(r.snr_db), f"{r.eb_n0_db:.4f}", r.bits_simulated, r.bit_errors, f"{r.ber:.5e}", r.trials]
        )
    return buf.getvalue()


def read_results_csv(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    for row in rows:
        row["snr_db"] = float(row["snr_db"])
        row["eb_n0_db"] = float(row["eb_n0_db"])
        row["bits"] = int(row["bits"])
        row["errors"] = int(row["errors"])
        row["ber"] = float(row["ber"])
        row["trials"] = int(row["trials"])
    return rows


def constellation_csv(scheme: ModScheme) -> str:
    """``label,I,Q`` with the label written as a bit string."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("label", "I", "Q"))
    k = scheme.bits_per_symbol
    for label, p in enumerate(scheme.points):
        w.writerow([format(label, f"0{k}b"), repr(float(p.real)), repr(float(p.imag))])
    return buf.getvalue()
