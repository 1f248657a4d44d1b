"""Scenario-file driver.

Usage: ``qmarket <command> --scenario <path> [--seed N] [--out <path>]`` with
commands check-arbitrage, price, interval, replicate, decompose, disk, crr.

Scenarios are YAML trees (see README for the grammar); reports are JSON with
sorted keys, byte-stable for a fixed scenario and seed.  Matrices are encoded
row-major as [re, im] pairs in both directions.  The environment variable
QMARKET_MAX_ITERS overrides the solver iteration cap.
"""

import argparse
import json
import os
import sys

import numpy as np
import yaml

from . import __version__
from .arbitrage import (
    DEFAULT_MAX_ITERS,
    FAITHFUL_STATE_FOUND,
    INDETERMINATE,
    check_no_arbitrage,
)
from .binomial import (
    NPeriodSpec,
    QubitMarketSpec,
    build_n_period,
    build_single_period,
    classical_tree_price,
    crr_price,
    risk_neutral_disk,
    sample_disk_states,
)
from .errors import InternalConsistencyError, QMarketError, SolverError, ValidationError
from .market import Filtration, MarketModel, OperatorAlgebra, discount
from .operators import apply_function
from .pricing import arbitrage_free_prices, optional_decomposition, replicate

REPORT_SCHEMA = "qmarket.report/1"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INDETERMINATE = 3
EXIT_INCONSISTENT = 4

COMMANDS = ("check-arbitrage", "price", "interval", "replicate", "decompose", "disk", "crr")


def _decode_matrix(rows, where):
    try:
        mat = np.array(
            [[complex(cell[0], cell[1]) for cell in row] for row in rows],
            dtype=complex,
        )
    except (TypeError, IndexError, ValueError) as exc:
        raise ValidationError(f"{where}: matrix entries must be [re, im] pairs") from exc
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"{where}: matrix must be square")
    return mat


def _encode_matrix(mat):
    return [[[float(c.real), float(c.imag)] for c in row] for row in np.asarray(mat, dtype=complex)]


def _require(mapping, key, where):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ValidationError(f"missing field {where}.{key}")
    return mapping[key]


def parse_scenario(text):
    """Parse and validate a YAML scenario into a canonical dict."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"scenario syntax error: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("scenario must be a mapping")
    market = _require(raw, "market", "scenario")
    kind = _require(market, "kind", "market")
    if kind not in ("qubit", "nperiod", "explicit"):
        raise ValidationError(f"market.kind must be qubit|nperiod|explicit, got {kind!r}")

    scenario = {"market": dict(market), "claims": [], "solver": {}}
    if kind == "qubit":
        QubitMarketSpec(
            float(_require(market, "x0", "market")),
            float(_require(market, "x1", "market")),
            float(market.get("x2", 0.0)),
            float(market.get("x3", 0.0)),
            float(_require(market, "r", "market")),
            float(_require(market, "s0", "market")),
            float(market.get("b0", 1.0)),
        )
    elif kind == "nperiod":
        n = int(_require(market, "n", "market"))
        if not 1 <= n <= 6:
            raise ValidationError(f"market.n = {n} outside 1..6 (dimension cap 2^N <= 64)")
        NPeriodSpec(
            n,
            float(_require(market, "a", "market")),
            float(_require(market, "b", "market")),
            float(_require(market, "r", "market")),
            float(_require(market, "s0", "market")),
            float(market.get("b0", 1.0)),
            market.get("pauli"),
        )
    else:
        _build_explicit_market(market)  # validates

    for i, claim in enumerate(raw.get("claims", [])):
        where = f"claims[{i}]"
        name = _require(claim, "name", where)
        ctype = _require(claim, "type", where)
        if ctype == "call":
            entry = {"name": name, "type": "call", "strike": float(_require(claim, "strike", where))}
        elif ctype == "matrix":
            mat = _decode_matrix(_require(claim, "entries", where), where)
            if np.abs(mat - mat.conj().T).max() > 1e-12 * max(1.0, np.abs(mat).max()):
                raise ValidationError(f"{where}.entries: matrix is not Hermitian")
            entry = {"name": name, "type": "matrix", "entries": _encode_matrix(mat)}
        elif ctype == "spectral":
            fn = _require(claim, "fn", where)
            if fn not in ("call", "put"):
                raise ValidationError(f"{where}.fn must be call|put")
            entry = {
                "name": name,
                "type": "spectral",
                "fn": fn,
                "strike": float(_require(claim, "strike", where)),
            }
        else:
            raise ValidationError(f"{where}.type must be call|matrix|spectral, got {ctype!r}")
        scenario["claims"].append(entry)

    solver = raw.get("solver", {}) or {}
    scenario["solver"] = {
        "seed": int(solver.get("seed", 0)),
        "max_iters": int(solver.get("max_iters", DEFAULT_MAX_ITERS)),
    }
    return scenario


def _build_explicit_market(market):
    dim = int(_require(market, "dim", "market"))
    bank = [float(b) for b in _require(market, "bank", "market")]
    algebras = []
    for t, spec in enumerate(_require(market, "filtration", "market")):
        where = f"market.filtration[{t}]"
        if spec == "trivial":
            algebras.append(OperatorAlgebra.trivial(dim))
        elif spec == "full":
            algebras.append(OperatorAlgebra.full(dim))
        elif isinstance(spec, dict) and "factor" in spec:
            algebras.append(OperatorAlgebra.tensor_factor(int(spec["factor"]), dim))
        elif isinstance(spec, dict) and "basis" in spec:
            algebras.append(
                OperatorAlgebra.from_basis(
                    [_decode_matrix(m, where) for m in spec["basis"]]
                )
            )
        else:
            raise ValidationError(f"{where}: expected trivial|full|{{factor}}|{{basis}}")
    filtration = Filtration(algebras)
    assets = []
    for j, proc in enumerate(_require(market, "assets", "market")):
        assets.append(
            [_decode_matrix(m, f"market.assets[{j}][{t}]") for t, m in enumerate(proc)]
        )
    return MarketModel(filtration, bank, assets)


def build_market(scenario):
    market = scenario["market"]
    kind = market["kind"]
    if kind == "qubit":
        spec = QubitMarketSpec(
            float(market["x0"]), float(market["x1"]),
            float(market.get("x2", 0.0)), float(market.get("x3", 0.0)),
            float(market["r"]), float(market["s0"]), float(market.get("b0", 1.0)),
        )
        return build_single_period(spec), spec
    if kind == "nperiod":
        spec = NPeriodSpec(
            int(market["n"]), float(market["a"]), float(market["b"]),
            float(market["r"]), float(market["s0"]), float(market.get("b0", 1.0)),
            market.get("pauli"),
        )
        return build_n_period(spec), spec
    return _build_explicit_market(market), None


def claim_payoff(entry, market):
    """Terminal payoff operator of a claim, in undiscounted currency."""
    s_term = market.assets[0][market.horizon]
    if entry["type"] == "call":
        k = entry["strike"]
        return apply_function(s_term, lambda s: max(s - k, 0.0))
    if entry["type"] == "spectral":
        k = entry["strike"]
        if entry["fn"] == "call":
            return apply_function(s_term, lambda s: max(s - k, 0.0))
        return apply_function(s_term, lambda s: max(k - s, 0.0))
    return _decode_matrix(entry["entries"], "claim")


def _witness_payload(state):
    if state is None:
        return None
    if state.dim == 2:
        return {"bloch": [float(v) for v in state.bloch_vector()]}
    return {"matrix": _encode_matrix(state.mat)}


def run(command, scenario, samples=100):
    """Dispatch a command against a parsed scenario; returns (report, exit_code)."""
    max_iters = int(os.environ.get("QMARKET_MAX_ITERS", scenario["solver"]["max_iters"]))
    seed = scenario["solver"]["seed"]
    market, spec = build_market(scenario)
    results = {}
    diagnostics = {}
    exit_code = EXIT_OK

    if command == "check-arbitrage":
        res = check_no_arbitrage(market, max_iters=max_iters)
        results = {
            "status": res.status,
            "lambda_star": res.lambda_star,
            "witness": _witness_payload(res.witness_state),
            "certificate": _encode_matrix(res.arbitrage_claim)
            if res.arbitrage_claim is not None
            else None,
            "note": res.note,
        }
        diagnostics["iterations"] = res.iterations
        if res.status == INDETERMINATE:
            exit_code = EXIT_INDETERMINATE
    elif command in ("price", "interval", "replicate", "decompose"):
        dmkt = discount(market)
        for entry in scenario["claims"]:
            payoff = claim_payoff(entry, market) / market.bank[market.horizon]
            if command == "replicate":
                rep = replicate(payoff, dmkt)
                results[entry["name"]] = {
                    "alpha": rep.alpha,
                    "residual": rep.residual,
                    "attainable": rep.attainable,
                    "strategy_terms": sum(len(v) for v in rep.strategy.terms.values()),
                }
            elif command == "decompose":
                cls = arbitrage_free_prices(payoff, dmkt, max_iters=max_iters)
                d = dmkt.dim
                values = [cls.interval.upper * np.eye(d, dtype=complex)] * market.horizon
                values.append(payoff)
                dec = optional_decomposition(values, dmkt, max_iters=max_iters)
                results[entry["name"]] = {
                    "v0": dec.v0,
                    "consumption_norms": [
                        float(np.linalg.norm(c)) for c in dec.consumption
                    ],
                    "strategy_terms": sum(len(v) for v in dec.strategy.terms.values()),
                }
            else:
                cls = arbitrage_free_prices(payoff, dmkt, max_iters=max_iters)
                payload = {
                    "lower": cls.interval.lower,
                    "upper": cls.interval.upper,
                    "attainable": cls.interval.attainable,
                    "open": cls.interval.interval_open,
                }
                if command == "price":
                    payload["unique_price"] = cls.unique_price
                    payload["replication_alpha"] = cls.replication.alpha
                results[entry["name"]] = payload
    elif command == "disk":
        if scenario["market"]["kind"] != "qubit":
            raise ValidationError("disk command requires a qubit market scenario")
        disk = risk_neutral_disk(spec)
        states = sample_disk_states(disk, samples, seed)
        results = {
            "normal": [float(v) for v in disk.normal],
            "offset": disk.offset,
            "radius": disk.radius,
            "samples": [[float(v) for v in s.bloch_vector()] for s in states],
        }
    elif command == "crr":
        if scenario["market"]["kind"] != "nperiod":
            raise ValidationError("crr command requires an nperiod market scenario")
        for entry in scenario["claims"]:
            if entry["type"] not in ("call", "spectral"):
                raise ValidationError("crr command prices strike-based calls only")
            k = entry["strike"]
            value = crr_price(spec.n_periods, spec.s0, k, spec.r, spec.a, spec.b)
            oracle = classical_tree_price(spec.n_periods, spec.s0, k, spec.r, spec.a, spec.b)
            results[entry["name"]] = {
                "crr": value,
                "tree_oracle": oracle,
                "difference": value - oracle,
            }
    else:
        raise ValidationError(f"unknown command {command!r}")

    report = {
        "schema": REPORT_SCHEMA,
        "version": __version__,
        "command": command,
        "seed": seed,
        "scenario": scenario,
        "results": results,
        "diagnostics": diagnostics,
    }
    return report, exit_code


def main(argv=None):
    parser = argparse.ArgumentParser(prog="qmarket", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--scenario", required=True, help="path to a YAML scenario file")
    parser.add_argument("--seed", type=int, default=None, help="override scenario seed")
    parser.add_argument("--out", default=None, help="write the JSON report here")
    parser.add_argument("--samples", type=int, default=100, help="disk sample count")
    args = parser.parse_args(argv)

    try:
        with open(args.scenario, "r", encoding="utf-8") as fh:
            scenario = parse_scenario(fh.read())
        if args.seed is not None:
            scenario["solver"]["seed"] = args.seed
        report, code = run(args.command, scenario, samples=args.samples)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InternalConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (SolverError, QMarketError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE

    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
