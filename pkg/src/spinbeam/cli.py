"""Config-driven command line: scenario runs, validation tables, spin
sweeps and frequency responses, with deterministic CSV/JSON output.

The output directory is taken from ``--out``/config, falling back to the
``SPINBEAM_OUTDIR`` environment variable, then the working directory.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
from pathlib import Path

import click
import jsonschema
import numpy as np

from .analysis import (DimensionlessSetup, campbell_sweep, frequency_ratio,
                       frequency_response, modal_frequencies)
from .assembly import AssemblyGraph, UncertainScalar, build_parametric_family
from .beam import BeamProperties
from .errors import (AlgebraicLoopError, InvalidParameterError,
                     ModelInvalidError, RankDeficiencyError, SpinbeamError,
                     TopologyError)
from .oracle_fe import fe_in_plane_frequencies, fe_out_of_plane_frequencies
from .rigid import RigidBodyProperties

EXIT_SCHEMA = 2
EXIT_EQUILIBRIUM = 3
EXIT_NUMERICAL = 4

ETA_GRID_FINE = (0, 2, 4, 6, 8, 10)
ETA_GRID_COARSE = (0, 3, 6, 12)

# reference beam for the dimensionless validation tables (any slender beam
# yields the same ratios; this one matches the spacecraft boom)
TABLE_BEAM = dict(rho=2700.0, S=3.14e-4, l=50.0, E=7e10, nu=0.33,
                  Jy=7.85e-9, Jz=7.85e-9, Jpx=1.57e-8)

THOR_LIKE = {
    "name": "thor-like",
    "spin": {"omega": 0.5, "r_omega": 0.0},
    "beams": [dict(TABLE_BEAM, name="boom1", elements=1),
              dict(TABLE_BEAM, name="boom2", elements=1)],
    "main_body": {
        "name": "hub", "mass": 500.0,
        "inertia": [[570.42, 0.0, 0.0], [0.0, 570.42, 0.0], [0.0, 0.0, 1000.0]],
        "ports": [{"name": "P1", "offset": [-2.0, 0.0, 0.0]},
                  {"name": "P2", "offset": [2.0, 0.0, 0.0]}],
    },
    "tip_masses": [{"name": "tip1", "mass": 5.0},
                   {"name": "tip2", "mass": 5.0}],
    "topology": [
        {"parent": "hub", "child": "boom1", "parent_port": "P1",
         "dcm": [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]},
        {"parent": "hub", "child": "boom2", "parent_port": "P2"},
        {"parent": "boom1", "child": "tip1"},
        {"parent": "boom2", "child": "tip2"},
    ],
    "analyses": [{"type": "equilibrium-report"}],
}

FIG7 = {
    "name": "fig7",
    "spin": {"omega": 0.5, "r_omega": 1.0},
    "beams": [dict(TABLE_BEAM, name="beam", elements=1)],
    "tip_masses": [{"name": "tip", "mass": 5.0}],
    "topology": [{"parent": "beam", "child": "tip"}],
    "root": {"clamp_offset": 2.0},
    "analyses": [{"type": "campbell", "omega_max": 2.0, "steps": 40,
                  "families": ["in-plane bending", "out-of-plane bending"],
                  "modes": 4}],
}


def _table_scenario(kind):
    mu = 1.0 if kind == "T3" else 0.0
    alpha = 1.0 if kind == "T2" else 0.0
    sc = {
        "name": f"tables{kind[1]}",
        "spin": {"omega": 0.0},
        "beams": [dict(TABLE_BEAM, name="beam", elements=1)],
        "topology": [],
        "root": {"clamp_offset": alpha * TABLE_BEAM["l"]},
        "analyses": [{"type": "table", "kind": kind}],
    }
    if mu > 0:
        beam_mass = TABLE_BEAM["rho"] * TABLE_BEAM["S"] * TABLE_BEAM["l"]
        sc["tip_masses"] = [{"name": "tip", "mass": mu * beam_mass}]
        sc["topology"] = [{"parent": "beam", "child": "tip"}]
    return sc


BUILTIN_SCENARIOS = {
    "thor-like": THOR_LIKE,
    "fig7": FIG7,
    "tables1": _table_scenario("T1"),
    "tables2": _table_scenario("T2"),
    "tables3": _table_scenario("T3"),
    "tables4": _table_scenario("T4"),
}

_VEC3 = {"type": "array", "items": {"type": "number"},
         "minItems": 3, "maxItems": 3}
_MAT3 = {"type": "array", "items": _VEC3, "minItems": 3, "maxItems": 3}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "spin", "beams"],
    "properties": {
        "name": {"type": "string"},
        "spin": {
            "type": "object", "additionalProperties": False,
            "required": ["omega"],
            "properties": {"omega": {"type": "number"},
                           "r_omega": {"type": "number", "minimum": 0}},
        },
        "beams": {
            "type": "array",
            "items": {
                "type": "object", "additionalProperties": False,
                "required": ["name", "rho", "S", "l", "E", "nu", "Jy", "Jz", "Jpx"],
                "properties": {
                    "name": {"type": "string"},
                    "rho": {"type": "number"}, "S": {"type": "number"},
                    "l": {"type": "number"}, "E": {"type": "number"},
                    "nu": {"type": "number"}, "G": {"type": "number"},
                    "Jy": {"type": "number"}, "Jz": {"type": "number"},
                    "Jpx": {"type": "number"},
                    "elements": {"type": "integer", "minimum": 1},
                    "damping": {
                        "type": "object", "additionalProperties": False,
                        "required": ["alpha", "beta"],
                        "properties": {"alpha": {"type": "number"},
                                       "beta": {"type": "number"}},
                    },
                },
            },
        },
        "main_body": {
            "type": "object", "additionalProperties": False,
            "required": ["name", "mass", "inertia", "ports"],
            "properties": {
                "name": {"type": "string"},
                "mass": {"type": "number"},
                "inertia": _MAT3,
                "ports": {"type": "array", "items": {
                    "type": "object", "additionalProperties": False,
                    "required": ["name", "offset"],
                    "properties": {"name": {"type": "string"},
                                   "offset": _VEC3}}},
            },
        },
        "tip_masses": {"type": "array", "items": {
            "type": "object", "additionalProperties": False,
            "required": ["name", "mass"],
            "properties": {"name": {"type": "string"},
                           "mass": {"type": "number"},
                           "r_mass": {"type": "number", "minimum": 0},
                           "inertia": _MAT3}}},
        "topology": {"type": "array", "items": {
            "type": "object", "additionalProperties": False,
            "required": ["parent", "child"],
            "properties": {"parent": {"type": "string"},
                           "child": {"type": "string"},
                           "parent_port": {"type": "string"},
                           "dcm": _MAT3}}},
        "root": {"type": "object", "additionalProperties": False,
                 "properties": {"clamp_offset": {"type": "number"}}},
        "analyses": {"type": "array", "items": {
            "type": "object",
            "required": ["type"],
            "properties": {"type": {"enum": [
                "table", "campbell", "freqresp", "equilibrium-report",
                "modal"]}},
        }},
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"dir": {"type": "string"}}},
    },
}


def fmt(x) -> str:
    """Shortest exact decimal form used in every serialized artifact."""
    if isinstance(x, float) and np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def _outdir(explicit=None, config=None):
    if explicit:
        return Path(explicit)
    if config and config.get("output", {}).get("dir"):
        return Path(config["output"]["dir"])
    return Path(os.environ.get("SPINBEAM_OUTDIR", "."))


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    click.echo(f"wrote {path}")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return float(o)
        raise TypeError(type(o))
    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"


# ---------------------------------------------------------------------------
# scenario -> assembly graph

def load_scenario(source) -> dict:
    """Load, schema-validate and return a scenario config.

    ``source`` is a builtin scenario name or a path to a JSON document."""
    if isinstance(source, dict):
        config = source
    elif source in BUILTIN_SCENARIOS:
        config = json.loads(json.dumps(BUILTIN_SCENARIOS[source]))
    else:
        with open(source) as fh:
            config = json.load(fh)
    jsonschema.validate(config, SCENARIO_SCHEMA)
    return config


def graph_from_config(config) -> AssemblyGraph:
    g = AssemblyGraph()
    for b in config.get("beams", []):
        props = BeamProperties(
            rho=b["rho"], S=b["S"], l=b["l"], E=b["E"], nu=b["nu"],
            Jy=b["Jy"], Jz=b["Jz"], Jpx=b["Jpx"], G=b.get("G"))
        damping = None
        if "damping" in b:
            damping = (b["damping"]["alpha"], b["damping"]["beta"])
        g.add_beam(b["name"], props, elements=b.get("elements", 1),
                   damping=damping)
    if "main_body" in config:
        mb = config["main_body"]
        props = RigidBodyProperties(m=mb["mass"], J_A=np.array(mb["inertia"]))
        g.add_main_body(mb["name"], props,
                        [(p["name"], p["offset"]) for p in mb["ports"]])
    for t in config.get("tip_masses", []):
        J = np.array(t["inertia"]) if "inertia" in t else None
        g.add_tip_mass(t["name"], t["mass"], J=J)
    for e in config.get("topology", []):
        dcm = np.array(e["dcm"]) if "dcm" in e else None
        g.connect_nodes(e["parent"], e["child"], dcm=dcm,
                        parent_port=e.get("parent_port"))
    if "root" in config:
        g.clamp_root(config["root"].get("clamp_offset", 0.0))
    return g


# ---------------------------------------------------------------------------
# table generators

def _cantilever_ratios(props, eta, mu, alpha, elements=1):
    """Classified dimensionless ratio table of the clamped spinning beam."""
    omega = DimensionlessSetup.spin_rate_for_eta(props, eta)
    g = AssemblyGraph()
    g.add_beam("beam", props, elements=elements)
    if mu > 0:
        g.add_tip_mass("tip", mu * props.mass)
        g.connect_nodes("beam", "tip")
    g.clamp_root(alpha * props.l)
    res = modal_frequencies(g.build(omega))
    return frequency_ratio(res, props)


def _bending_row(table, n=4):
    """First n in-plane/out-of-plane ratios; degenerate no-spin solutions
    report the same values in both planes."""
    fy = list(table["in-plane bending"])[:n]
    fz = list(table["out-of-plane bending"])[:n]
    if len(fy) < n or len(fz) < n:
        merged = sorted(table["in-plane bending"] + table["out-of-plane bending"]
                        + table["coupled"])
        fy = fz = merged[::2][:n] if len(merged) >= 2 * n else merged[:n]
    return fy, fz


def generate_table(kind: str, elements: int = 1, oracle: bool = False) -> str:
    """CSV reproduction of one validation table (T1, T2, T3 or T4).

    T1-T3 sweep the spin ratio for the three boundary scenarios (bare
    cantilever, unit root offset, unit tip mass).  T4 compares first
    out-of-plane ratios across discretizations, optionally adding the
    in-house finite-element oracle column.  Torsion is reported as computed
    (dimensionless sqrt(3) for one element); the source tables' torsion
    normalization is unresolved, so no match with their printed constant is
    implied.
    """
    props = BeamProperties(**TABLE_BEAM)
    if kind in ("T1", "T2", "T3"):
        mu = 1.0 if kind == "T3" else 0.0
        alpha = 1.0 if kind == "T2" else 0.0
        header = (["eta"]
                  + [f"In-plane bending {k}" for k in ("1st", "2nd", "3rd", "4th")]
                  + [f"Out-of-plane bending {k}" for k in ("1st", "2nd", "3rd", "4th")]
                  + ["Traction 1st", "Torsion 1st"])
        rows = []
        for eta in ETA_GRID_FINE:
            table = _cantilever_ratios(props, eta, mu, alpha, elements)
            fy, fz = _bending_row(table)
            tr = table["traction"][:1]
            to = table["torsion"][:1]
            rows.append([eta] + fy + fz + tr + to)
        return _csv_text(header, rows)
    if kind == "T4":
        header = ["eta", "f_b1_out_titop_1el", f"f_b1_out_titop_{elements}el"]
        if oracle:
            header += ["f_b1_out_fe20", "f_b1_in_titop_1el",
                       f"f_b1_in_titop_{elements}el", "f_b1_in_fe20"]
        rows = []
        for eta in ETA_GRID_COARSE:
            t1 = _cantilever_ratios(props, eta, 0.0, 0.0, 1)
            tn = _cantilever_ratios(props, eta, 0.0, 0.0, elements)
            fy1, fz1 = _bending_row(t1)
            fyn, fzn = _bending_row(tn)
            row = [eta, fz1[0], fzn[0]]
            if oracle:
                omega = DimensionlessSetup.spin_rate_for_eta(props, eta)
                scz = np.sqrt(props.rho * props.S * props.l**4
                              / (props.E * props.Jy))
                scy = np.sqrt(props.rho * props.S * props.l**4
                              / (props.E * props.Jz))
                fz_fe = fe_out_of_plane_frequencies(props, omega,
                                                    n_elements=20)[0] * scz
                fy_fe = fe_in_plane_frequencies(props, omega,
                                                n_elements=20)[0] * scy
                row += [fz_fe, fy1[0], fyn[0], fy_fe]
            rows.append(row)
        return _csv_text(header, rows)
    raise InvalidParameterError(f"unknown table kind {kind!r}")


# ---------------------------------------------------------------------------
# analyses

def _equilibrium_report(graph, omega):
    eqs = graph.propagate_equilibrium(omega)
    report = {"spin": omega, "nodes": {}}
    for name, rec in eqs.items():
        if isinstance(rec, list):  # beam elements
            report["nodes"][name] = [{
                "x_P": st.x_P, "v_P": st.v_P, "omega_P": st.omega_P,
                "W_C": st.W_C, "W_P": st.W_P, "q_static": st.q_static,
                "valid": st.valid} for st in rec]
        else:
            entry = {k: v for k, v in rec.items()}
            report["nodes"][name] = entry
    return report


def _modal_report(graph, omega):
    res = modal_frequencies(graph.build(omega))
    order = np.argsort(res.frequencies)
    return {
        "spin": omega,
        "eigenvalues": [[res.eigenvalues[i].real, res.eigenvalues[i].imag]
                        for i in order],
        "frequencies_rad_s": [res.frequencies[i] for i in order],
        "damping_ratios": [res.damping[i] for i in order],
        "families": [res.families[i] for i in order],
    }


def _run_campbell(graph, spec, omega0, r_omega):
    omega_max = spec.get("omega_max", omega0 * (1 + r_omega) if r_omega else 2.0)
    steps = spec.get("steps", 40)
    grid = np.linspace(0.0, omega_max, steps + 1)
    if grid[0] == 0.0 and grid.size > 1:
        pass  # a zero-spin point is a valid equilibrium
    curve = campbell_sweep(lambda om: graph.build(om), grid,
                           n_modes=spec.get("modes"),
                           families=spec.get("families"))
    header = ["omega_rad_s"] + [f"{fam} #{i+1}" for i, fam in
                                enumerate(curve.families)]
    rows = [[om] + list(curve.branches[:, k])
            for k, om in enumerate(curve.omegas)]
    return _csv_text(header, rows)


_CHANNEL_COMPONENTS = {
    "vdot": 0, "wdot": 3, "v": 6, "w": 9, "x": 12, "th": 15,
}


def parse_channel(spec: str):
    """Parse 'Tin2:wdot2'-style channel selections.

    Inputs: Fin<i>/Tin<i> (external force/torque component i).  Outputs:
    vdot/wdot/v/w/x/th<i> rows of the main-body motion vector."""
    try:
        u, y = spec.split(":")
        kind, comp = u[:-1], int(u[-1]) - 1
        in_off = {"Fin": 0, "Tin": 3}[kind] + comp
        ykind, ycomp = y[:-1], int(y[-1]) - 1
        out_off = _CHANNEL_COMPONENTS[ykind] + ycomp
    except (ValueError, KeyError, IndexError):
        raise InvalidParameterError(
            f"cannot parse channel {spec!r}; expected e.g. 'Tin2:wdot2'")
    return in_off, out_off


def parse_grid(spec: str) -> np.ndarray:
    kind, a, b, n = spec.split(":")
    a, b, n = float(a), float(b), int(n)
    if kind == "log":
        return np.logspace(np.log10(a), np.log10(b), n)
    if kind == "lin":
        return np.linspace(a, b, n)
    raise InvalidParameterError(f"unknown grid kind {kind!r}")


def _run_freqresp(graph, config, channel, grid, omega):
    blk = graph.build(omega)
    main = config.get("main_body", {}).get("name")
    if main is None:
        raise InvalidParameterError(
            "freqresp needs a main body with an external wrench input")
    in_off, out_off = channel
    gains, poles = frequency_response(
        blk, (f"{main}:m_B", out_off), (f"{main}:W_ext", in_off), grid)
    rows = [[w, g.real if np.isfinite(g) else np.inf,
             g.imag if np.isfinite(g) else np.inf,
             abs(g), "pole" if p else ""]
            for w, g, p in zip(grid, gains, poles)]
    return _csv_text(["omega_rad_s", "re", "im", "abs", "flag"], rows)


def execute(config, outdir) -> int:
    """Run every analysis of a validated scenario config."""
    graph = graph_from_config(config)
    omega0 = config["spin"]["omega"]
    r_omega = config["spin"].get("r_omega", 0.0)
    base = Path(outdir)
    name = config["name"]
    for spec in config.get("analyses", []):
        kind = spec["type"]
        if kind == "table":
            text = generate_table(spec.get("kind", "T1"),
                                  spec.get("elements", 1),
                                  spec.get("oracle", False))
            _write(base / f"{name}_{spec.get('kind', 'T1')}.csv", text)
        elif kind == "equilibrium-report":
            report = _equilibrium_report(graph, omega0)
            _write(base / f"{name}_equilibrium.json", _json_text(report))
        elif kind == "modal":
            _write(base / f"{name}_modal.json",
                   _json_text(_modal_report(graph, omega0)))
        elif kind == "campbell":
            _write(base / f"{name}_campbell.csv",
                   _run_campbell(graph, spec, omega0, r_omega))
        elif kind == "freqresp":
            channel = parse_channel(spec.get("channel", "Tin2:wdot2"))
            grid = parse_grid(spec.get("grid", "log:1e-3:1e3:400"))
            _write(base / f"{name}_freqresp.csv",
                   _run_freqresp(graph, config, channel, grid, omega0))
    if r_omega > 0:
        spin = UncertainScalar(omega0, r_omega)
        masses = {t["name"]: UncertainScalar(t["mass"], t.get("r_mass", 0.0))
                  for t in config.get("tip_masses", [])
                  if t.get("r_mass", 0.0) > 0}
        _, delta = build_parametric_family(graph, spin, masses)
        _write(base / f"{name}_delta.json", _json_text({
            "entries": [{"name": n, "repetition": c} for n, c in delta.entries],
            "note": ("repetition counts are node-dependency counts of this "
                     "implementation, not a minimal linear-fractional "
                     "realization")}))
    return 0


# ---------------------------------------------------------------------------
# click commands

@click.group()
def main():
    """Two-port spinning-structure models: tables, sweeps and responses."""


@main.command()
@click.argument("config")
@click.option("--out", default=None, help="Output directory.")
def run(config, out):
    """Run a scenario config (builtin name or JSON path)."""
    try:
        cfg = load_scenario(config)
    except (jsonschema.ValidationError, json.JSONDecodeError, OSError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_SCHEMA)
    try:
        sys.exit(execute(cfg, _outdir(out, cfg)))
    except ModelInvalidError as exc:
        click.echo(_json_text({"error": "equilibrium-invalid",
                               "detail": str(exc),
                               "q_static": getattr(exc, "q_static", None)}),
                   err=True)
        sys.exit(EXIT_EQUILIBRIUM)
    except (RankDeficiencyError, AlgebraicLoopError, TopologyError,
            np.linalg.LinAlgError, SpinbeamError) as exc:
        click.echo(_json_text({"error": "numerical", "detail": str(exc)}),
                   err=True)
        sys.exit(EXIT_NUMERICAL)


@main.command()
@click.argument("kind", type=click.Choice(["T1", "T2", "T3", "T4"]))
@click.option("--elements", default=None, type=int,
              help="Beam elements per model (default 1; 5 for T4).")
@click.option("--oracle", is_flag=True, help="Add finite-element oracle columns (T4).")
@click.option("--out", default=None, help="Output directory.")
def table(kind, elements, oracle, out):
    """Reproduce one validation table as CSV."""
    if elements is None:
        elements = 5 if kind == "T4" else 1
    try:
        text = generate_table(kind, elements, oracle)
    except SpinbeamError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    _write(_outdir(out) / f"table_{kind}.csv", text)


@main.command()
@click.argument("scenario")
@click.option("--omega-max", required=True, type=float)
@click.option("--steps", required=True, type=int)
@click.option("--out", default=None, help="Output directory.")
def campbell(scenario, omega_max, steps, out):
    """Sweep the spin rate and emit tracked frequency branches."""
    try:
        cfg = load_scenario(scenario)
    except (jsonschema.ValidationError, json.JSONDecodeError, OSError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_SCHEMA)
    graph = graph_from_config(cfg)
    spec = next((a for a in cfg.get("analyses", []) if a["type"] == "campbell"),
                {})
    spec = dict(spec, omega_max=omega_max, steps=steps, type="campbell")
    try:
        text = _run_campbell(graph, spec, cfg["spin"]["omega"],
                             cfg["spin"].get("r_omega", 0.0))
    except ModelInvalidError as exc:
        click.echo(f"equilibrium invalid: {exc}", err=True)
        sys.exit(EXIT_EQUILIBRIUM)
    _write(_outdir(out, cfg) / f"{cfg['name']}_campbell.csv", text)


@main.command()
@click.argument("scenario")
@click.option("--channel", default="Tin2:wdot2", show_default=True)
@click.option("--grid", default="log:1e-3:1e3:400", show_default=True)
@click.option("--out", default=None, help="Output directory.")
def freqresp(scenario, channel, grid, out):
    """Frequency response of one channel of the assembled model."""
    try:
        cfg = load_scenario(scenario)
    except (jsonschema.ValidationError, json.JSONDecodeError, OSError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_SCHEMA)
    try:
        ch = parse_channel(channel)
        om_grid = parse_grid(grid)
        graph = graph_from_config(cfg)
        text = _run_freqresp(graph, cfg, ch, om_grid, cfg["spin"]["omega"])
    except ModelInvalidError as exc:
        click.echo(f"equilibrium invalid: {exc}", err=True)
        sys.exit(EXIT_EQUILIBRIUM)
    except SpinbeamError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    _write(_outdir(out, cfg) / f"{cfg['name']}_freqresp.csv", text)


if __name__ == "__main__":
    main()
