"""Player vector layout, component alignment and assembly."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .events import ActionCategory, format_float
from .heatmap import GridSpec
from .nmf import FactorModel

A = ActionCategory


@dataclass(frozen=True)
class Slot:
    """One named component of the player vector.

    ``abbr`` is the printed abbreviation (not unique: long shot and left shot
    are both "LS"); ``code`` is unique and used as a column name. ``anchor`` is
    the pitch location the component is expected to centre on.
    """

    category: ActionCategory
    code: str
    abbr: str
    name: str
    anchor: tuple


def _slots(category, *rows):
    return [Slot(category, code, abbr, name, (float(x), float(y)))
            for code, abbr, name, x, y in rows]


DEFAULT_SLOTS = tuple(
    _slots(A.SHOT,
           ("CS", "CS", "Close Shot", 91, 50),
           ("LS", "LS", "Long Shot", 76, 50),
           ("RS", "RS", "Right Shot", 87, 27),
           ("LtS", "LS", "Left Shot", 87, 73))
    + _slots(A.CROSS,
             ("LBC", "LBC", "L. Backline Cross", 94, 88),
             ("RBC", "RBC", "R. Backline Cross", 94, 12),
             ("RFC", "RFC", "R. Flank Cross", 76, 6),
             ("LFC", "LFC", "L. Flank Cross", 76, 94))
    + _slots(A.DRIBBLE,
             ("CD", "CD", "Center Dribble", 66, 50),
             ("RFD", "RFD", "R. Flank Dribble", 66, 8),
             ("LFD", "LFD", "L. Flank Dribble", 66, 92),
             ("LBD", "LBD", "L. Back Dribble", 30, 78),
             ("RBD", "RBD", "R. Back Dribble", 30, 22))
    + _slots(A.PASS,
             ("LBP", "LBP", "L. Back Pass", 28, 78),
             ("RFP", "RFP", "R. Flank Pass", 62, 8),
             ("LFP", "LFP", "L. Flank Pass", 62, 92),
             ("CP", "CP", "Center Pass", 55, 50),
             ("RBP", "RBP", "R. Back Pass", 28, 22))
    + _slots(A.LONG_PASS,
             ("LBLP", "LBLP", "L. back long pass", 22, 72),
             ("LFLP", "LFLP", "L. flank long pass", 52, 92),
             ("RFLP", "RFLP", "R. flank long pass", 52, 8),
             ("CLP", "CLP", "Center long pass", 42, 50),
             ("RBLP", "RBLP", "R. back long pass", 22, 28))
    + _slots(A.KEY_PASS,
             ("RFKP", "RFKP", "R. far key pass", 68, 20),
             ("RKP", "RKP", "R. key pass", 85, 30),
             ("LKP", "LKP", "L. key pass", 85, 70),
             ("LFKP", "LFKP", "L. far key pass", 68, 80))
    + _slots(A.INTERCEPTION,
             ("LBI", "LBI", "L. back interception", 18, 72),
             ("RFI", "RFI", "R. flank interception", 45, 8),
             ("LFI", "LFI", "L. flank interception", 45, 92),
             ("RBI", "RBI", "R. back interception", 18, 28))
    + _slots(A.CLEARANCE,
             ("MC", "MC", "Middle clearance", 17, 50),
             ("LC", "LC", "Left clearance", 12, 82),
             ("IC", "IC", "Inner clearance", 5, 50),
             ("RC", "RC", "Right clearance", 12, 18))
    + _slots(A.HEADER,
             ("BH", "BH", "Back Header", 9, 50),
             ("MFH", "MFH", "Mid Front Header", 72, 50),
             ("RBH", "RBH", "R. Back Header", 20, 28),
             ("LBH", "LBH", "L. Back Header", 20, 72),
             ("FH", "FH", "Front Header", 92, 50))
    + _slots(A.RECOVERY,
             ("LBR", "LBR", "L. back recovery", 26, 75),
             ("RFR", "RFR", "R. flank recovery", 55, 8),
             ("LFR", "LFR", "L. flank recovery", 55, 92),
             ("RBR", "RBR", "R. back recovery", 26, 25))
)

DEFAULT_K = {cat: sum(1 for s in DEFAULT_SLOTS if s.category is cat) for cat in A}


@dataclass(frozen=True)
class VectorLayout:
    slots: tuple = DEFAULT_SLOTS

    def __post_init__(self):
        seen = []
        for s in self.slots:
            if s.category in seen and seen[-1] is not s.category:
                raise ValueError(f"slots of {s.category} must be contiguous")
            if s.category not in seen:
                seen.append(s.category)
        codes = [s.code for s in self.slots]
        if len(set(codes)) != len(codes):
            raise ValueError("slot codes must be unique")

    @classmethod
    def default(cls):
        return cls(tuple(DEFAULT_SLOTS))

    @classmethod
    def from_ks(cls, ks: Mapping):
        """Layout with ``ks[category]`` components per category.

        Categories keeping their default count reuse the named default slots;
        others get generic ``<Category><i>`` slots anchored at the pitch centre.
        """
        slots = []
        for cat in A:
            k = int(ks.get(cat, ks.get(cat.value, DEFAULT_K[cat])))
            if k < 0:
                raise ValueError(f"negative k for {cat}")
            defaults = [s for s in DEFAULT_SLOTS if s.category is cat]
            if k == len(defaults):
                slots.extend(defaults)
            else:
                slots.extend(Slot(cat, f"{cat.value}{i}", f"{cat.value}{i}",
                                  f"{cat.value} component {i}", (50.0, 50.0))
                             for i in range(k))
        return cls(tuple(slots))

    @property
    def categories(self):
        out = []
        for s in self.slots:
            if s.category not in out:
                out.append(s.category)
        return tuple(out)

    @property
    def total_dim(self):
        return len(self.slots)

    @property
    def codes(self):
        return tuple(s.code for s in self.slots)

    @property
    def abbreviations(self):
        return tuple(s.abbr for s in self.slots)

    def k(self, category):
        category = A.parse(category)
        return sum(1 for s in self.slots if s.category is category)

    def ks(self):
        return {cat: self.k(cat) for cat in self.categories}

    def offsets(self):
        """``{category: (start, stop)}`` slot ranges."""
        out = {}
        start = 0
        for cat in self.categories:
            stop = start + self.k(cat)
            out[cat] = (start, stop)
            start = stop
        return out

    def slots_for(self, category):
        category = A.parse(category)
        return [s for s in self.slots if s.category is category]

    def indices(self, categories):
        """Vector indices of every slot of the given categories, in layout order."""
        wanted = {A.parse(c) for c in categories}
        return [i for i, s in enumerate(self.slots) if s.category in wanted]

    def to_dict(self):
        return {"slots": [{"category": s.category.value, "code": s.code, "abbr": s.abbr,
                           "name": s.name, "anchor": list(s.anchor)} for s in self.slots]}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(Slot(A.parse(d["category"]), d["code"], d["abbr"], d["name"],
                              tuple(d["anchor"])) for d in data["slots"]))


@dataclass
class PlayerMatchVector:
    player_id: str
    match_id: str
    v: np.ndarray
    position_label: Optional[str] = None
    style: Optional[int] = None
    layout: VectorLayout = field(default=None, repr=False)

    @property
    def key(self):
        return (self.match_id, self.player_id)


def component_costs(W, slots: Sequence[Slot], spec: GridSpec):
    """Expected distance between each component's mass and each slot anchor."""
    centers = spec.cell_centers()
    anchors = np.array([s.anchor for s in slots])
    dist = np.sqrt(((centers[:, None, :] - anchors[None, :, :]) ** 2).sum(axis=2))
    mass = W / np.where(W.sum(axis=0) > 0, W.sum(axis=0), 1.0)
    return mass.T @ dist  # (k, n_slots)


def align_components(model: FactorModel, slots: Sequence[Slot], spec: GridSpec):
    """Reorder a category model's components so component ``i`` serves slot ``i``.

    Components are matched to slot anchors by minimum total expected distance
    (Hungarian assignment); the returned model is a permuted copy.
    """
    if model.k != len(slots):
        raise ValueError(f"model has {model.k} components, layout has {len(slots)} slots")
    if model.degenerate:
        return model
    costs = component_costs(model.W, slots, spec)
    comp, slot = linear_sum_assignment(costs)
    order = np.empty(model.k, dtype=np.int64)
    order[slot] = comp
    return replace(model, W=np.ascontiguousarray(model.W[:, order]),
                   H=np.ascontiguousarray(model.H[order]))


def assemble_matrix(models: Mapping, index: Sequence, layout: VectorLayout):
    """Stack the per-category ``H`` matrices into an ``(l, total_dim)`` array."""
    V = np.zeros((len(index), layout.total_dim))
    for cat, (start, stop) in layout.offsets().items():
        model = models.get(cat, models.get(cat.value))
        if model is None:
            raise ValueError(f"no model for category {cat}")
        if model.H.shape != (stop - start, len(index)):
            raise ValueError(
                f"{cat} model H has shape {model.H.shape}, expected {(stop - start, len(index))}")
        V[:, start:stop] = model.H.T
    return V


def assemble(models: Mapping, index: Sequence, layout: Optional[VectorLayout] = None):
    """One vector per ``(match_id, player_id)`` in ``index``: the H columns concatenated."""
    layout = layout or VectorLayout.default()
    V = assemble_matrix(models, index, layout)
    return [PlayerMatchVector(player_id=p, match_id=m, v=V[j].copy(), layout=layout)
            for j, (m, p) in enumerate(index)]


def season_vector(vectors: Sequence):
    """Unweighted entrywise mean of a player's match vectors.

    Sums are exactly rounded, so the result does not depend on match order.
    """
    if len(vectors) == 0:
        raise ValueError("season_vector needs at least one match vector")
    arr = np.array([v.v if isinstance(v, PlayerMatchVector) else v for v in vectors],
                   dtype=np.float64)
    return np.array([math.fsum(col) for col in arr.T]) / len(arr)


def write_vectors_csv(path, vectors: Sequence[PlayerMatchVector], layout: VectorLayout):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["player_id", "match_id", "position", *layout.codes])
        for pv in vectors:
            w.writerow([pv.player_id, pv.match_id, pv.position_label or "",
                        *(format_float(x) for x in pv.v)])


def read_vectors_csv(path, layout: Optional[VectorLayout] = None):
    layout = layout or VectorLayout.default()
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header[3:]) != layout.codes:
            raise ValueError(f"{path}: vector columns do not match the layout")
        for row in r:
            out.append(PlayerMatchVector(row[0], row[1], np.array([float(x) for x in row[3:]]),
                                         row[2] or None, layout=layout))
    return out
