"""System-file parsing and artifact writers (JSON, CSV, SVG)."""

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .agents import AgentModel, RationalTF, realize_siso
from .errors import DimensionError
from .network import NetworkStructure, complete_laplacian_structure, cyclic_structure, path_structure

SCHEMA_VERSION = 1


class InputError(ValueError):
    """A model, design, or flag could not be parsed into consistent objects."""


@dataclass(eq=False)
class SystemSpec:
    agent: AgentModel
    structure: NetworkStructure
    design: dict = field(default_factory=dict)
    sim: dict = field(default_factory=dict)
    name: str = "system"
    tf: RationalTF | None = None


def _line_of(text, key):
    """1-based line of the first occurrence of ``"key"`` in ``text``, if any."""
    if text is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return None if m is None else text.count("\n", 0, m.start()) + 1


def _fail(where, key, msg, text):
    line = _line_of(text, key)
    loc = f"{where}:{line}" if line else where
    raise InputError(f"{loc}: [{key}] {msg}")


def _matrix(obj, key, where, text):
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        _fail(where, key, f"not a numeric matrix ({exc})", text)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.size == 0:
        _fail(where, key, f"expected a non-empty 2-D array, got shape {arr.shape}", text)
    if not np.all(np.isfinite(arr)):
        _fail(where, key, "entries must be finite", text)
    return arr


def parse_complex(token):
    """Parse ``'a+bi'``-style text (``i`` or ``j``) or an ``[re, im]`` pair."""
    if isinstance(token, (list, tuple)):
        if len(token) != 2:
            raise InputError(f"complex pair must have two entries: {token!r}")
        return complex(float(token[0]), float(token[1]))
    if isinstance(token, (int, float)):
        return complex(token)
    s = str(token).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise InputError(f"cannot parse complex number {token!r}") from None


def parse_targets(text):
    """Parse ``"a±bi;c"`` into a list; ``±`` expands to the conjugate pair."""
    out = []
    for tok in str(text).split(";"):
        tok = tok.strip()
        if not tok:
            continue
        if "±" in tok or "+-" in tok:
            re_part, im_part = re.split(r"±|\+-", tok, maxsplit=1)
            z = parse_complex(f"{re_part}+{im_part}")
            out.extend([z, z.conjugate()])
        else:
            out.append(parse_complex(tok))
    if not out:
        raise InputError(f"no targets in {text!r}")
    return out


def parse_agent(obj, where="<agent>", text=None):
    if not isinstance(obj, dict):
        _fail(where, "agent", "must be an object with a 'tf' or 'ss' entry", text)
    try:
        if "tf" in obj:
            tf = RationalTF(obj["tf"]["num"], obj["tf"]["den"])
            return realize_siso(tf), tf
        if "ss" in obj:
            ss = obj["ss"]
            return AgentModel(_matrix(ss["Ah"], "Ah", where, text),
                              _matrix(ss["Bh"], "Bh", where, text),
                              _matrix(ss["Ch"], "Ch", where, text)), None
    except KeyError as exc:
        _fail(where, "agent", f"missing entry {exc}", text)
    except (DimensionError, ValueError, TypeError) as exc:
        if isinstance(exc, InputError):
            raise
        _fail(where, "agent", str(exc), text)
    _fail(where, "agent", "needs a 'tf' or 'ss' entry", text)


_GENERATORS = {
    "cyclic": cyclic_structure,
    "path": path_structure,
    "complete": complete_laplacian_structure,
}


def parse_network(obj, where="<network>", text=None):
    if not isinstance(obj, dict):
        _fail(where, "network", "must be an object", text)
    try:
        B = _matrix(obj["B"], "B", where, text) if "B" in obj else None
        C = _matrix(obj["C"], "C", where, text) if "C" in obj else None
        for gen, fn in _GENERATORS.items():
            if gen in obj:
                g = obj[gen]
                return fn(int(g["N"]), float(g.get("k", 1.0)), B, C)
        return NetworkStructure(_matrix(obj["A"], "A", where, text), B, C)
    except KeyError as exc:
        _fail(where, "network", f"missing entry {exc}", text)
    except (DimensionError, ValueError, TypeError) as exc:
        if isinstance(exc, InputError):
            raise
        _fail(where, "network", str(exc), text)


def parse_system(obj, where="<system>", text=None):
    if not isinstance(obj, dict):
        raise InputError(f"{where}: top level must be a JSON object")
    version = obj.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        _fail(where, "version", f"unsupported schema version {version!r}", text)
    for key in ("agent", "network"):
        if key not in obj:
            raise InputError(f"{where}: missing top-level entry '{key}'")
    agent, tf = parse_agent(obj["agent"], where, text)
    structure = parse_network(obj["network"], where, text)
    if structure.M != structure.M_out:
        _fail(where, "C", f"B has {structure.M} channels but C has {structure.M_out}", text)
    return SystemSpec(agent, structure, dict(obj.get("design", {})), dict(obj.get("sim", {})),
                      str(obj.get("name", Path(where).stem)), tf)


def load_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        return json.loads(text), text
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON ({exc.msg})") from None


def load_system(path):
    obj, text = load_json(path)
    return parse_system(obj, str(path), text)


def load_builtin(name):
    """Load a shipped fixture (``pendulum`` or ``mimo_counterexample``)."""
    ref = resources.files("gfvnet") / "data" / f"{name}.json"
    text = ref.read_text()
    return parse_system(json.loads(text), f"{name}.json", text)


def load_design(path, structure):
    obj, text = load_json(path)
    where = str(path)
    try:
        K = _matrix(obj["K"], "K", where, text)
        L = _matrix(obj["L"], "L", where, text)
    except (KeyError, TypeError):
        raise InputError(f"{where}: design file needs 'K' and 'L'") from None
    if L.shape == (1, structure.N) and structure.M == 1:
        L = L.T
    if K.shape != (structure.M, structure.N) or L.shape != (structure.N, structure.M_out):
        raise InputError(
            f"{where}: K {K.shape} / L {L.shape} do not match the system "
            f"(expected {(structure.M, structure.N)} / {(structure.N, structure.M_out)})"
        )
    return K, L, obj


def dumps(obj):
    """Deterministic JSON text; floats use Python's shortest round-trip repr."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def fmt(x):
    return format(float(x), ".17g")


def region_csv(sample):
    lines = ["re,im,inside"]
    for i, im in enumerate(sample.im):
        for j, re_ in enumerate(sample.re):
            lines.append(f"{fmt(re_)},{fmt(im)},{int(sample.membership[i, j])}")
    return "\n".join(lines) + "\n"


def trajectory_csv(traj):
    nx = traj.states.shape[1]
    nu = traj.inputs.shape[1]
    header = (["time"] + [f"x_{k}" for k in range(1, nx + 1)]
              + [f"xhat_{k}" for k in range(1, nx + 1)]
              + [f"err_{k}" for k in range(1, nx + 1)]
              + [f"u_{k}" for k in range(1, nu + 1)])
    data = np.hstack([traj.times[:, None], traj.states, traj.estimates, traj.errors, traj.inputs])
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in data)
    return "\n".join(lines) + "\n"


class _Frame:
    """Affine map from a data rectangle to an SVG plot area."""

    def __init__(self, x0, x1, y0, y1, width=640, height=480, pad=50):
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1
        self.w, self.h, self.pad = width, height, pad

    def x(self, v):
        return self.pad + (v - self.x0) / (self.x1 - self.x0) * (self.w - 2 * self.pad)

    def y(self, v):
        return self.h - self.pad - (v - self.y0) / (self.y1 - self.y0) * (self.h - 2 * self.pad)

    def axes(self, xlabel, ylabel, yfmt="{:g}"):
        p, w, h = self.pad, self.w, self.h
        out = [f'<rect x="{p}" y="{p}" width="{w - 2 * p}" height="{h - 2 * p}" '
               'fill="none" stroke="black"/>']
        for k in range(5):
            xv = self.x0 + k * (self.x1 - self.x0) / 4
            yv = self.y0 + k * (self.y1 - self.y0) / 4
            out.append(f'<text x="{self.x(xv):.2f}" y="{h - p + 16}" font-size="11" '
                       f'text-anchor="middle">{xv:g}</text>')
            out.append(f'<text x="{p - 6}" y="{self.y(yv) + 4:.2f}" font-size="11" '
                       f'text-anchor="end">{yfmt.format(yv)}</text>')
        out.append(f'<text x="{w / 2}" y="{h - 10}" font-size="12" text-anchor="middle">'
                   f'{xlabel}</text>')
        out.append(f'<text x="14" y="{h / 2}" font-size="12" text-anchor="middle" '
                   f'transform="rotate(-90 14 {h / 2})">{ylabel}</text>')
        return out


def _svg(frame, body, title):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{frame.w}" height="{frame.h}" '
            f'viewBox="0 0 {frame.w} {frame.h}">')
    return "\n".join([head, f"<title>{title}</title>",
                      f'<rect width="{frame.w}" height="{frame.h}" fill="white"/>',
                      *body, "</svg>"]) + "\n"


def region_svg(sample, overlay=(), title="stability region"):
    """Inside grid cells in blue, overlay eigenvalues as red crosses.

    The plot window grows to show overlay points outside the sampled bounds;
    the sampled rectangle is outlined.
    """
    re0, re1, im0, im1 = sample.bounds
    overlay = np.asarray(list(overlay), dtype=complex)
    xs = [re0, re1] + list(overlay.real)
    ys = [im0, im1] + list(overlay.imag)
    span_x, span_y = max(xs) - min(xs), max(ys) - min(ys)
    f = _Frame(min(xs) - 0.05 * span_x, max(xs) + 0.05 * span_x,
               min(ys) - 0.05 * span_y, max(ys) + 0.05 * span_y)
    dre = (re1 - re0) / (len(sample.re) - 1)
    dim = (im1 - im0) / (len(sample.im) - 1)
    body = f.axes("Re", "Im")
    body.append(f'<rect x="{f.x(re0):.2f}" y="{f.y(im1):.2f}" '
                f'width="{f.x(re1) - f.x(re0):.2f}" height="{f.y(im0) - f.y(im1):.2f}" '
                'fill="none" stroke="gray" stroke-dasharray="4 3"/>')
    # horizontal runs of inside cells become single rectangles
    for i, im in enumerate(sample.im):
        row = sample.membership[i]
        j = 0
        while j < row.size:
            if not row[j]:
                j += 1
                continue
            start = j
            while j < row.size and row[j]:
                j += 1
            xa, xb = f.x(sample.re[start] - dre / 2), f.x(sample.re[j - 1] + dre / 2)
            ya, yb = f.y(im + dim / 2), f.y(im - dim / 2)
            body.append(f'<rect x="{xa:.2f}" y="{ya:.2f}" width="{xb - xa:.2f}" '
                        f'height="{yb - ya:.2f}" fill="#3a6fd8"/>')
    for z in overlay:
        cx, cy = f.x(z.real), f.y(z.imag)
        body.append(f'<path d="M{cx - 5:.2f} {cy - 5:.2f}L{cx + 5:.2f} {cy + 5:.2f}'
                    f'M{cx - 5:.2f} {cy + 5:.2f}L{cx + 5:.2f} {cy - 5:.2f}" '
                    'stroke="#d62728" stroke-width="2"/>')
    return _svg(f, body, title)


def norms_svg(traj, title="trajectory norms"):
    """``log10`` of ``||x||`` and ``||x - xhat||`` against time."""
    series = {"state": ("#1f77b4", traj.norms("state")),
              "error": ("#d62728", traj.norms("error"))}
    floor = 1e-16
    logs = {k: np.log10(np.maximum(v, floor)) for k, (_, v) in series.items()}
    lo = min(float(v.min()) for v in logs.values())
    hi = max(float(v.max()) for v in logs.values())
    if hi - lo < 1e-9:
        lo, hi = lo - 1, hi + 1
    t0, t1 = float(traj.times[0]), float(traj.times[-1])
    if t1 <= t0:
        t1 = t0 + 1
    f = _Frame(t0, t1, lo, hi)
    body = f.axes("time [s]", "log10 norm", "{:.1f}")
    for k, (color, _) in series.items():
        pts = " ".join(f"{f.x(t):.2f},{f.y(v):.2f}" for t, v in zip(traj.times, logs[k]))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1"/>')
    body.append(f'<text x="{f.w - f.pad}" y="{f.pad - 10}" font-size="12" text-anchor="end">'
                'blue ||x||, red ||x - xhat||</text>')
    return _svg(f, body, title)
