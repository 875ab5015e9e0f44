"""Sampled trajectories and their CSV form."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .core import Params, PhaseState, Space, ValidationError, complex_to_real, real_to_complex, _LAYOUT

_HEADERS = {
    Space.FLAT_C: ["t", "re", "im", "pre", "pim"],
    Space.R3_MONOPOLE: ["t", "q1", "q2", "q3", "p1", "p2", "p3"],
    Space.SPHERE_CHART0: ["t", "p_re", "p_im", "w_re", "w_im", "chart"],
    Space.PSEUDOSPHERE: ["t", "p_re", "p_im", "w_re", "w_im"],
    Space.FLAT_C2: ["t", "pi0_re", "pi0_im", "pi1_re", "pi1_im", "om0_re", "om0_im", "om1_re", "om1_im"],
}


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples (t_i, state_i) stored as arrays.

    ``coords`` has one row per sample in the ``PhaseState.coords`` layout;
    ``charts`` records the sphere chart per sample (zeros elsewhere).
    """

    t: np.ndarray
    coords: np.ndarray
    space: Space
    system: str = ""
    params: Params = field(default_factory=Params)
    charts: np.ndarray | None = None

    def __post_init__(self):
        space = Space(self.space)
        object.__setattr__(self, "space", space)
        t = np.array(self.t, dtype=float)
        n, is_complex = _LAYOUT[space]
        c = np.array(self.coords, dtype=complex if is_complex else float).reshape(len(t), n)
        if len(t) > 1 and not (np.all(np.diff(t) > 0) or np.all(np.diff(t) < 0)):
            raise ValidationError("trajectory times must be strictly monotone")
        charts = np.zeros(len(t), dtype=int) if self.charts is None else np.array(self.charts, dtype=int)
        for a in (t, c, charts):
            a.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "charts", charts)

    def __len__(self):
        return len(self.t)

    @property
    def samples(self) -> list:
        return [(float(ti), self.state(i)) for i, ti in enumerate(self.t)]

    def state(self, i: int) -> PhaseState:
        space = self.space
        chart = int(self.charts[i])
        if space in (Space.SPHERE_CHART0, Space.SPHERE_CHART1):
            space = Space.SPHERE_CHART1 if chart else Space.SPHERE_CHART0
        return PhaseState(space, tuple(self.coords[i].tolist()), chart)

    def real_vectors(self) -> np.ndarray:
        if np.iscomplexobj(self.coords):
            return complex_to_real(self.coords)
        return np.array(self.coords)

    @property
    def position(self) -> np.ndarray:
        """First complex coordinate (z, w or p) as a complex array."""
        return np.array(self.coords[:, 0])

    def with_(self, **changes) -> "Trajectory":
        d = dict(t=self.t, coords=self.coords, space=self.space, system=self.system,
                 params=self.params, charts=self.charts)
        d.update(changes)
        return Trajectory(**d)

    # -- CSV -----------------------------------------------------------------
    def to_csv(self) -> str:
        space = Space.SPHERE_CHART0 if self.space is Space.SPHERE_CHART1 else self.space
        header = _HEADERS[space]
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        x = self.real_vectors()
        for i in range(len(self.t)):
            row = [format(self.t[i], ".17g")] + [format(v, ".17g") for v in x[i]]
            if space is Space.SPHERE_CHART0:
                row.append(str(int(self.charts[i])))
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str, params: Params | None = None, system: str = "") -> "Trajectory":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValidationError("empty CSV")
        header = [h.strip() for h in rows[0]]
        for space, h in _HEADERS.items():
            if header == h:
                break
        else:
            raise ValidationError(f"unrecognized CSV header {header}")
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        if data.size == 0:
            raise ValidationError("CSV has no samples")
        t = data[:, 0]
        charts = None
        vals = data[:, 1:]
        if space is Space.SPHERE_CHART0:
            charts, vals = vals[:, -1].astype(int), vals[:, :-1]
        coords = real_to_complex(vals) if _LAYOUT[space][1] else vals
        return cls(t, coords, space, system, params or Params(), charts)

    @classmethod
    def read_csv(cls, path, params: Params | None = None, system: str = "") -> "Trajectory":
        with open(path, encoding="utf-8") as fh:
            return cls.from_csv(fh.read(), params, system)
