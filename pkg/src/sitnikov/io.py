"""File formats: JSON with exact decimal strings, CSV trajectories and probes.

JSON output is canonical (fixed key order, two-space indent, trailing
newline) so identical runs give byte-identical files.
"""
import csv
import io as _io
import json
from fractions import Fraction

from .ball import ball_from_json, ball_to_json, fraction_to_decimal, parse_rational
from .errors import ParseError
from .kepler import OrbitParams

__all__ = [
    "dumps", "load_json", "load_orbit", "state_to_json", "state_from_json",
    "trajectory_csv", "probe_csv", "TRAJECTORY_HEADER", "PROBE_HEADER",
    "format_time",
]

TRAJECTORY_HEADER = ["t", "z_center", "z_radius", "v_center", "v_radius", "E_center", "E_radius"]
PROBE_HEADER = ["t", "l", "bits_z", "bits_v", "bits_phi", "steps", "wall_seconds"]
STATE_FIELDS = ("a", "e", "mu", "z", "v", "E")


def dumps(obj):
    return json.dumps(obj, indent=2, ensure_ascii=True) + "\n"


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def load_orbit(path):
    """OrbitParams from a JSON file such as {"a": "1", "e": "0.1", "mu": "1"}."""
    return OrbitParams.from_json(load_json(path))


def format_time(t):
    """Exact rendering of a rational time: decimal when dyadic, else p/q."""
    return fraction_to_decimal(Fraction(t))


def state_to_json(st, eps_exp=None):
    out = {"t": format_time(st.t)}
    if eps_exp is not None:
        out["eps_exp"] = int(eps_exp)
    out["state"] = {k: ball_to_json(getattr(st, k)) for k in STATE_FIELDS}
    out["work"] = {"steps": st.steps, "precision": st.precision, "order": st.order,
                   "attempts": st.attempts}
    out["query_log"] = dict(st.query_log.as_dict())
    return out


def state_from_json(obj):
    """Parse a state document back to (t, dict of Balls, extras)."""
    if not isinstance(obj, dict) or "state" not in obj or "t" not in obj:
        raise ParseError("state document needs 't' and 'state'")
    st = obj["state"]
    if set(st) != set(STATE_FIELDS):
        raise ParseError(f"state needs exactly the fields {STATE_FIELDS}")
    balls = {k: ball_from_json(st[k]) for k in STATE_FIELDS}
    return parse_rational(obj["t"]), balls, {k: v for k, v in obj.items() if k not in ("t", "state")}


def _csv(rows, header):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def trajectory_csv(samples):
    """Rows (t, z, v, E) -> CSV text with exact decimal centers and radii."""
    rows = []
    for t, *balls in samples:
        row = [format_time(t)]
        for b in balls:
            j = ball_to_json(b)
            row += [j["center"], j["radius"]]
        rows.append(row)
    return _csv(rows, TRAJECTORY_HEADER)


def probe_csv(records):
    return _csv([r.csv_row() for r in records], PROBE_HEADER)
