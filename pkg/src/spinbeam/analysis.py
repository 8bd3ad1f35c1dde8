"""Modal extraction, mode-family classification, dimensionless frequency
ratios, spin-rate sweeps and frequency responses of closed models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beam import BeamProperties
from .blocks import StateBlock
from .errors import InvalidParameterError, ModelInvalidError, PortError

__all__ = [
    "ModalResult",
    "DimensionlessSetup",
    "CampbellCurve",
    "modal_frequencies",
    "frequency_ratio",
    "campbell_sweep",
    "frequency_response",
]

FAMILIES = ("in-plane bending", "out-of-plane bending", "traction",
            "torsion", "rigid", "coupled")

# an eigenpair belongs to a family when that partition holds at least this
# share of its modal energy; otherwise it is reported as coupled
DOMINANCE_THRESHOLD = 0.60

RIGID_TOL = 1e-8


@dataclass
class ModalResult:
    """Classified eigensolution of a closed model.

    One entry per conjugate pair (the positive-imaginary member is kept);
    ``frequencies`` are |Im| for undamped models and pair with ``damping``
    ratios otherwise.  ``families`` carries one tag per entry.
    """

    eigenvalues: np.ndarray
    frequencies: np.ndarray
    damping: np.ndarray
    families: list
    eigenvectors: np.ndarray = field(repr=False)
    state_labels: list = field(default_factory=list, repr=False)

    def by_family(self, family: str) -> np.ndarray:
        """Frequencies of one family, ascending."""
        f = np.array([fr for fr, fam in zip(self.frequencies, self.families)
                      if fam == family])
        return np.sort(f)

    def count(self, family: str) -> int:
        return sum(1 for fam in self.families if fam == family)


def _partition_energies(block: StateBlock, vec: np.ndarray) -> dict:
    out = {}
    for p in block.partitions:
        out[p.family] = out.get(p.family, 0.0) + max(p.value(vec), 0.0)
    return out


def _separate_cluster(block: StateBlock, vecs: np.ndarray) -> np.ndarray:
    """Rotate the eigenvectors of a degenerate cluster so each concentrates
    in a single coordinate partition where possible.

    Repeated eigenvalues (e.g. the two bending planes of a symmetric beam
    at rest) span an invariant subspace in which the returned eigenvectors
    are an arbitrary mix; any rotation inside it is equally valid, so pick
    the one aligned with the partitions.  Works greedily in coefficient
    space: at each step extract the combination with the highest energy
    fraction in a single partition, then deflate.
    """
    k = vecs.shape[1]
    if k == 1 or not block.partitions:
        return vecs
    part_rows = {}
    for p in block.partitions:
        part_rows.setdefault(p.family, []).extend(p.idx.tolist())
    grams = {}
    for fam, rows in part_rows.items():
        sub = vecs[np.array(sorted(set(rows)))]
        grams[fam] = sub.conj().T @ sub
    total = vecs.conj().T @ vecs

    from scipy.linalg import eigh as geigh

    basis = np.eye(k, dtype=complex)  # coefficient basis of the free subspace
    chosen = []
    while basis.shape[1] > 0:
        m = basis.shape[1]
        Bt = basis.conj().T @ total @ basis
        Bt = 0.5 * (Bt + Bt.conj().T)
        best = None
        for fam, G in grams.items():
            A = basis.conj().T @ G @ basis
            w, U = geigh(0.5 * (A + A.conj().T), Bt)
            if best is None or w[-1] > best[0]:
                best = (w[-1], w, U)
        _, w, U = best
        # the generalized eigenvectors are Gram-orthogonal, so the columns
        # concentrated in the winning family (fraction > 1/2) split cleanly
        # from the rest, which forms the deflated subspace
        n_take = max(1, int(np.sum(w > 0.5)))
        for j in range(m - 1, m - 1 - n_take, -1):
            chosen.append(vecs @ (basis @ U[:, j]))
        basis = basis @ U[:, :m - n_take]
    out = np.stack(chosen, axis=1)
    norms = np.linalg.norm(out, axis=0)
    return out / np.where(norms > 0, norms, 1.0)


def modal_frequencies(block: StateBlock) -> ModalResult:
    """Eigen-decompose a closed model and classify its mode families.

    The model must have no open motion inputs (unconnected structural
    ports); exogenous wrench inputs are allowed.  Classification uses the
    dominant modal-energy partition; repeated frequencies are re-separated
    inside their invariant subspace before tagging.
    """
    open_motion = [g.name for g in block.inputs if g.size == 18]
    if open_motion:
        raise PortError(
            f"model has open motion ports {open_motion}; close or clamp them first")
    if block.n_states == 0:
        raise ModelInvalidError("static block has no dynamics to analyze")

    lam, V = np.linalg.eig(block.A)
    scale = max(np.abs(lam).max(), 1e-300)
    keep = [i for i in range(lam.size)
            if lam[i].imag > 1e-12 * scale
            or (abs(lam[i].imag) <= 1e-12 * scale)]
    # real eigenvalues appear once per state; pair them by sorted order
    real_idx = [i for i in keep if abs(lam[i].imag) <= 1e-12 * scale]
    osc_idx = [i for i in keep if lam[i].imag > 1e-12 * scale]

    order = np.argsort(np.abs(lam[osc_idx].imag))
    osc_idx = [osc_idx[i] for i in order]

    # regroup numerically repeated oscillatory eigenvalues and disentangle
    idx_sorted = osc_idx
    vals = lam[idx_sorted]
    vecs = V[:, idx_sorted]
    i = 0
    while i < len(idx_sorted):
        j = i + 1
        while (j < len(idx_sorted)
               and abs(vals[j] - vals[i]) <= 1e-9 * max(abs(vals[i]), 1e-300)):
            j += 1
        if j - i > 1:
            vecs[:, i:j] = _separate_cluster(block, vecs[:, i:j])
        i = j

    entries = []
    for k, lam_k in enumerate(vals):
        entries.append((lam_k, vecs[:, k]))
    for i in real_idx:
        entries.append((lam[i], V[:, i]))

    eigenvalues, freqs, damp, fams, evecs = [], [], [], [], []
    for lam_k, v in entries:
        eigenvalues.append(lam_k)
        if abs(lam_k.real) <= RIGID_TOL * max(abs(lam_k), 1e-300):
            freqs.append(abs(lam_k.imag))
            damp.append(0.0)
        else:
            freqs.append(abs(lam_k))
            damp.append(-lam_k.real / abs(lam_k))
        if abs(lam_k) <= RIGID_TOL * scale:
            fams.append("rigid")
        else:
            energies = _partition_energies(block, v)
            total = sum(energies.values())
            if total <= 0:
                fams.append("coupled")
            else:
                best = max(energies, key=energies.get)
                fams.append(best if energies[best] >= DOMINANCE_THRESHOLD * total
                            else "coupled")
        evecs.append(v)
    return ModalResult(np.array(eigenvalues), np.array(freqs), np.array(damp),
                       fams, np.stack(evecs, axis=1) if evecs else np.zeros((0, 0)),
                       block.state_labels)


@dataclass(frozen=True)
class DimensionlessSetup:
    """Dimensionless groups of the spinning-beam validation scenarios."""

    eta_by: float  # spin ratio for in-plane bending
    eta_bz: float  # spin ratio for out-of-plane bending
    eta_tx: float  # spin ratio for traction
    eta_rx: float  # spin ratio for torsion
    mu: float      # tip mass / beam mass
    alpha: float   # root offset / length

    @classmethod
    def from_parameters(cls, props: BeamProperties, omega: float,
                        tip_mass: float = 0.0, offset: float = 0.0):
        rho, S, l = props.rho, props.S, props.l
        return cls(
            eta_by=omega * np.sqrt(rho * S * l**4 / (props.E * props.Jz)),
            eta_bz=omega * np.sqrt(rho * S * l**4 / (props.E * props.Jy)),
            eta_tx=omega * np.sqrt(rho * l**2 / props.E),
            eta_rx=omega * np.sqrt(rho * l**2 / props.G),
            mu=tip_mass / props.mass,
            alpha=offset / l)

    @staticmethod
    def spin_rate_for_eta(props: BeamProperties, eta: float,
                          plane: str = "y") -> float:
        """Spin rate producing a given bending spin ratio."""
        J = props.Jz if plane == "y" else props.Jy
        return eta / np.sqrt(props.rho * props.S * props.l**4 / (props.E * J))


def frequency_ratio(result: ModalResult, props: BeamProperties) -> dict:
    """Dimensionless frequency table, one ascending list per family.

    Bending frequencies are scaled by the plane's own flexural time scale,
    traction and torsion by the axial and shear wave time scales.  Families
    with no classified member map to empty lists.
    """
    rho, S, l = props.rho, props.S, props.l
    scales = {
        "in-plane bending": np.sqrt(rho * S * l**4 / (props.E * props.Jz)),
        "out-of-plane bending": np.sqrt(rho * S * l**4 / (props.E * props.Jy)),
        "traction": np.sqrt(rho * l**2 / props.E),
        "torsion": np.sqrt(rho * l**2 / props.G),
    }
    table = {}
    for family, scale in scales.items():
        table[family] = [f * scale for f in result.by_family(family)]
    table["rigid"] = list(result.by_family("rigid"))
    table["coupled"] = list(result.by_family("coupled"))
    return table


@dataclass
class CampbellCurve:
    """Tracked natural-frequency branches over a spin-rate grid."""

    omegas: np.ndarray
    branches: np.ndarray          # (n_branches, n_grid) rad/s
    families: list                # family tag of each branch at its start
    truncated_at: int = None      # grid index where tracking stopped, if any

    def branch(self, family: str, order: int = 0) -> np.ndarray:
        idx = [i for i, f in enumerate(self.families) if f == family]
        if order >= len(idx):
            raise InvalidParameterError(
                f"no branch #{order} for family {family!r}")
        return self.branches[idx[order]]


def campbell_sweep(model_at, omegas, n_modes: int = None,
                   families=None) -> CampbellCurve:
    """Track natural frequencies over a strictly increasing spin grid.

    ``model_at`` maps a spin rate to a closed model (an
    :class:`~spinbeam.assembly.AssemblyGraph` build or a parametric-family
    factory wrapper).  Branch identity is maintained between grid points by
    maximal eigenvector alignment; ties fall back to frequency proximity.
    A point whose equilibrium is invalid truncates the curve with a
    diagnostic index rather than failing.
    """
    omegas = np.asarray(omegas, dtype=float)
    if omegas.size == 0 or np.any(np.diff(omegas) <= 0):
        raise InvalidParameterError("spin grid must be nonempty and increasing")

    results = []
    truncated_at = None
    for k, om in enumerate(omegas):
        try:
            results.append(modal_frequencies(model_at(om)))
        except ModelInvalidError:
            truncated_at = k
            break
    if not results:
        raise ModelInvalidError("no valid equilibrium on the spin grid")

    first = results[0]
    osc = [i for i in range(first.frequencies.size) if first.frequencies[i] > 0]
    osc.sort(key=lambda i: first.frequencies[i])
    if families is not None:
        osc = [i for i in osc if first.families[i] in families]
    if n_modes is not None:
        osc = osc[:n_modes]

    n_pts = len(results)
    branches = np.full((len(osc), omegas.size), np.nan)
    branches[:, 0] = first.frequencies[osc]
    prev_vecs = [first.eigenvectors[:, i] for i in osc]
    prev_freq = branches[:, 0].copy()

    for k in range(1, n_pts):
        res = results[k]
        cand = [i for i in range(res.frequencies.size) if res.frequencies[i] > 0]
        used = set()
        for b, v_prev in enumerate(prev_vecs):
            best, best_score = None, -1.0
            for i in cand:
                if i in used:
                    continue
                v = res.eigenvectors[:, i]
                denom = np.linalg.norm(v_prev) * np.linalg.norm(v)
                score = abs(np.vdot(v_prev, v)) / denom if denom > 0 else 0.0
                # proximity tie-break keeps crossing branches apart
                score -= 1e-3 * abs(res.frequencies[i] - prev_freq[b]) / max(
                    prev_freq[b], 1e-12)
                if score > best_score:
                    best, best_score = i, score
            if best is None:
                continue
            used.add(best)
            branches[b, k] = res.frequencies[best]
            prev_vecs[b] = res.eigenvectors[:, best]
            prev_freq[b] = res.frequencies[best]

    return CampbellCurve(omegas, branches, [first.families[i] for i in osc],
                         truncated_at)


def frequency_response(block: StateBlock, output_sel, input_sel, omegas):
    """Complex response ``C (jwI - A)^{-1} B + D`` on a frequency grid.

    ``output_sel``/``input_sel`` are ``(group_name, component)`` pairs or
    plain row/column indices.  Returns ``(gains, pole_flags)`` where a True
    flag marks grid points landing on an (effectively undamped) pole whose
    gain is reported as inf rather than numerical garbage.
    """
    omegas = np.asarray(omegas, dtype=float)

    def resolve(sel, groups, slicer):
        if isinstance(sel, tuple):
            name, comp = sel
            return slicer(name).start + comp
        return int(sel)

    row = resolve(output_sel, block.outputs, block.output_slice)
    col = resolve(input_sel, block.inputs, block.input_slice)
    c = block.C[row]
    b = block.B[:, col]
    d = block.D[row, col]

    n = block.n_states
    gains = np.empty(omegas.size, dtype=complex)
    poles = np.zeros(omegas.size, dtype=bool)
    eigs = np.linalg.eigvals(block.A) if n else np.array([])
    scale = max(np.abs(eigs).max(), 1.0) if eigs.size else 1.0
    for k, w in enumerate(omegas):
        if n == 0:
            gains[k] = d
            continue
        if eigs.size and np.min(np.abs(eigs - 1j * w)) < 1e-9 * scale:
            gains[k] = np.inf
            poles[k] = True
            continue
        gains[k] = c @ np.linalg.solve(1j * w * np.eye(n) - block.A, b) + d
    return gains, poles
