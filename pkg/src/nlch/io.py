"""File outputs (energy CSV, field CSV/PGM snapshots, manifest) and config parsing."""
import csv
import math
from pathlib import Path

import numpy as np

ENERGY_COLUMNS = ("step", "t", "E_original", "E_modified", "R", "xi", "D")


class ConfigError(ValueError):
    """Malformed config file or unknown key."""


def fmt(v) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_energy_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENERGY_COLUMNS)
        for step, t, E, Em, R, x, D in rows:
            w.writerow([int(step), fmt(float(t)), fmt(float(E)), fmt(float(Em)), fmt(float(R)),
                        fmt(float(x)), fmt(float(D))])


def read_energy_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def write_field_csv(path, phi: np.ndarray) -> None:
    """One line per grid row ``i``, 17 significant digits."""
    with open(path, "w") as fh:
        for row in np.asarray(phi):
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def read_field_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_pgm(path, phi: np.ndarray, maxval: int = 255) -> None:
    """Plain (P2) graymap, values mapped affinely from [min, max] onto [0, maxval]."""
    a = np.asarray(phi, dtype=float)
    lo, hi = float(a.min()), float(a.max())
    if hi > lo:
        img = np.rint((a - lo) / (hi - lo) * maxval).astype(int)
    else:
        img = np.zeros(a.shape, dtype=int)
    rows, cols = img.shape
    with open(path, "w") as fh:
        fh.write(f"P2\n# min={lo:.17g} max={hi:.17g}\n{cols} {rows}\n{maxval}\n")
        for r in img:
            fh.write(" ".join(map(str, r)))
            fh.write("\n")


def read_pgm(path) -> np.ndarray:
    tokens = []
    with open(path) as fh:
        if fh.readline().strip() != "P2":
            raise ValueError("not a plain PGM file")
        for line in fh:
            tokens.extend(line.split("#", 1)[0].split())
    cols, rows, _maxval = int(tokens[0]), int(tokens[1]), int(tokens[2])
    return np.array(tokens[3:], dtype=int).reshape(rows, cols)


def snapshot_name(t: float) -> str:
    return f"snapshot_t{t:g}"


def write_snapshot(outdir, t: float, phi: np.ndarray) -> tuple:
    outdir = Path(outdir)
    stem = snapshot_name(t)
    csv_path, pgm_path = outdir / f"{stem}.csv", outdir / f"{stem}.pgm"
    write_field_csv(csv_path, phi)
    write_pgm(pgm_path, phi)
    return csv_path, pgm_path


def _short(v) -> str:
    # shortest round-tripping repr keeps echoed config values readable
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_manifest(path, items: dict) -> None:
    """``key = value`` lines, sorted by key, same syntax as the config files."""
    with open(path, "w") as fh:
        for k in sorted(items):
            v = items[k]
            if isinstance(v, (list, tuple)):
                v = ",".join(_short(x) for x in v)
            elif v is None:
                v = "none"
            else:
                v = _short(v)
            fh.write(f"{k} = {v}\n")


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment.  Values stay strings."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            out[key] = value
    return out


def parse_float_list(text: str) -> list:
    text = text.strip()
    if not text or text.lower() == "none":
        return []
    return [float(s) for s in text.split(",") if s.strip()]


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_optional_float(text):
    if text is None:
        return None
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower()
    if s in ("", "none", "auto"):
        return None
    v = float(s)
    if not math.isfinite(v):
        raise ConfigError(f"expected a finite number, got {text!r}")
    return v
