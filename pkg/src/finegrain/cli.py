"""Command line front end: ``finegrain <subcommand> [flags]``.

Every invocation prints a single JSON document (or CSV table) on stdout.
Exit code 0 means every built-in check passed, 1 means a numerical check
failed, 2 means the command line was malformed.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import clifford, complementarity, games, models, steering, uncertainty
from .linalg import DensityMatrixError, NotHermitianError, maximally_entangled

SIG_DIGITS = 12
CHECK_TOL = 1e-9
TSIRELSON = 0.5 + 0.5 / math.sqrt(2.0)


class UsageError(Exception):
    pass


@dataclass
class CommandResult:
    exit_code: int
    payload: str
    stderr: str = ""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}\n")

    def exit(self, status=0, message=None):
        if status:
            raise UsageError(message or "")
        raise UsageError("")


def _num(x: float) -> float:
    return float(f"{float(x):.{SIG_DIGITS}g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG_DIGITS}g}"
    return str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


class Checks:
    def __init__(self):
        self.items = []

    def add(self, name: str, deviation: float, tol: float = CHECK_TOL):
        self.items.append({"name": name, "ok": bool(deviation <= tol), "deviation": float(deviation)})

    def flag(self, name: str, ok: bool):
        self.items.append({"name": name, "ok": bool(ok), "deviation": 0.0 if ok else 1.0})

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.items)


def _result(doc: dict, checks: Checks, fmt: str) -> CommandResult:
    doc = dict(doc)
    doc["checks"] = checks.items
    code = 0 if checks.ok else 1
    if fmt == "csv":
        rows = [(k, v) for k, v in doc.items() if isinstance(v, (int, float, np.floating)) and not isinstance(v, bool)]
        rows += [(f"check:{c['name']}", c["deviation"]) for c in checks.items]
        return CommandResult(code, _csv(("quantity", "value"), rows))
    return CommandResult(code, json.dumps(_clean(doc), indent=2) + "\n")


# --- shared pieces ----------------------------------------------------------


def _xor_game_checks(game: games.XorGame, strat: games.QuantumStrategy, checks: Checks):
    """Game-as-uncertainty rewrite, steering consistency and tightness of the zeta sum."""
    q = games.quantum_value(game, strat)
    steered = games.steered_certainty_sum(game, strat)
    checks.add("game_equals_steered_certainty_sum", abs(q.value - steered.value))
    report = steering.ensembles_consistent(steered.witness["ensembles"])
    checks.add("steered_ensembles_consistent", report.max_deviation)
    meas = strat.bob_measurements(game.p_t)
    zeta_sum = sum(
        game.p_s[s] * ens.weights[a] * uncertainty.zeta(meas, game.answer(s, a))[0]
        for s, ens in enumerate(steered.witness["ensembles"])
        for a in range(2)
    )
    checks.add("zeta_sum_is_tight", abs(zeta_sum - q.value))
    qbox = games.quantum_box(strat)
    checks.add("quantum_box_no_signalling", models.is_no_signalling(qbox)[1])
    return q, zeta_sum


def _retrieval_setup(n: int):
    game = games.make_retrieval(n)
    bob = games.retrieval_bob_vectors(n)
    return game, bob, games.optimal_clifford_strategy(game, bob)


# --- subcommands ------------------------------------------------------------


def cmd_chsh(args) -> CommandResult:
    checks = Checks()
    game = games.make_chsh()
    strat = games.chsh_optimal_strategy()
    q, zeta_sum = _xor_game_checks(game, strat, checks)
    classical = games.classical_value(game)
    ns, witness = games.ns_value(game)
    pr = games.box_value(game, models.pr_box()).value
    checks.add("tsirelson_bound", abs(q.value - TSIRELSON))
    checks.add("classical_three_quarters", abs(classical.value - 0.75), 0.0)
    checks.add("ns_witness_no_signalling", models.is_no_signalling(witness)[1], 1e-12)
    checks.add("pr_box_wins", abs(pr - 1.0), 0.0)
    doc = {"game": "chsh", "quantum": q.value, "classical": classical.value, "ns": ns, "pr_box": pr}
    if args.report:
        meas = strat.bob_measurements(game.p_t)
        rel = uncertainty.fine_grained_relation(meas)
        doc["zeta_sum"] = zeta_sum
        doc["relation"] = rel.to_json()
        doc["terms"] = q.terms
        doc["classical_strategy"] = classical.witness
        doc["ns_witness"] = witness.to_json()
        bound, _ = uncertainty.min_entropic_bound(meas, rel)
        doc["min_entropic_bound"] = bound
    return _result(doc, checks, args.format)


def cmd_retrieval(args) -> CommandResult:
    checks = Checks()
    n = args.n
    game, bob, strat = _retrieval_setup(n)
    if not args.values:
        checks.flag("complementary_answers", bool(np.all(game.answers[:, 0] != game.answers[:, 1])))
        return _result({"n": n, "game": game.to_json()}, checks, args.format)
    q, zeta_sum = _xor_game_checks(game, strat, checks)
    classical = games.classical_value(game)
    zc = uncertainty.zeta_clifford(bob, game.p_t, game.answer(0, 0))
    _, _, heuristic = games.optimize_xor_vectors(game, restarts=64, seed=args.seed)
    target = 0.5 + 0.5 / math.sqrt(n)
    checks.add("quantum_closed_form", abs(q.value - target))
    checks.add("zeta_closed_form", abs(zc.zeta - target))
    checks.add("heuristic_reaches_value", abs(heuristic - target), 1e-6)
    meas = uncertainty.MeasurementSet.from_vectors(bob, game.p_t)
    h_min = -math.log2(target)
    worst = max(
        abs(uncertainty.average_min_entropy(meas, uncertainty.zeta_clifford(bob, game.p_t, game.answer(s, a)).state) - h_min)
        for s in range(game.n_alice) for a in range(2)
    )
    checks.add("min_entropy_tight", worst)
    doc = {
        "n": n, "quantum": q.value, "classical": classical.value, "zeta": zc.zeta,
        "heuristic": heuristic, "ns": games.ns_value(game)[0], "min_entropy_bound": h_min,
    }
    return _result(doc, checks, args.format)


def _pairs_partition(n: int) -> list[list[str]]:
    flip = lambda x: "".join("1" if c == "0" else "0" for c in x)
    return [[x, flip(x)] for x in uncertainty.bitstrings(n) if x[0] == "0"]


def cmd_zeta(args) -> CommandResult:
    checks = Checks()
    if args.game:
        doc = json.loads(Path(args.game).read_text())
        # accept the output of `retrieval` as well as a bare game document
        doc = dict(doc.get("game", doc))
        # printed probabilities carry 12 digits; restore exact normalisation
        for key in ("p_s", "p_t"):
            p = np.asarray(doc[key], dtype=float)
            if abs(p.sum() - 1.0) > 1e-9:
                raise ValueError(f"{key} does not sum to 1")
            doc[key] = (p / p.sum()).tolist()
        game = games.XorGame.from_json(doc)
        alice, bob, value = games.optimize_xor_vectors(game, restarts=32, seed=args.seed)
        p_t = game.p_t
        extra = {"game_classical": games.classical_value(game).value, "game_heuristic": value}
    else:
        bob = games.retrieval_bob_vectors(args.n)
        p_t = np.full(args.n, 1.0 / args.n)
        extra = {}
    meas = uncertainty.MeasurementSet.from_vectors(bob, p_t)
    rel = uncertainty.fine_grained_relation(meas)
    q_sum = sum(uncertainty.uncertainty_operator(meas, x).operator for x in rel.zetas)
    n = meas.n
    checks.add("uncertainty_operators_sum",
               float(np.max(np.abs(q_sum - _qsum_target(n, meas.dim)))), 1e-10)
    worst = max(abs(uncertainty.zeta_clifford(bob, p_t, x).zeta - z) for x, z in rel.zetas.items())
    checks.add("closed_form_matches_eigenvalue", worst)
    bound, state = uncertainty.min_entropic_bound(meas, rel)
    if args.format == "csv":
        return CommandResult(0 if checks.ok else 1, _csv(("x", "zeta"), [(e["x"], e["zeta"]) for e in rel.to_json()["entries"]]))
    doc = {"relation": rel.to_json(), "min_entropic_bound": bound, "bound_attained": state is not None}
    doc.update(extra)
    return _result(doc, checks, args.format)


def _qsum_target(n: int, dim: int) -> np.ndarray:
    # every effect appears in 2^(n-1) strings, and E^0 + E^1 = I for each t
    return 2 ** (n - 1) * np.eye(dim)


def cmd_steer_check(args) -> CommandResult:
    checks = Checks()
    game, bob, strat = _retrieval_setup(args.n)
    ensembles = games.maximally_certain_ensembles(game, bob)
    report = steering.ensembles_consistent(ensembles)
    checks.add("maximally_certain_ensembles_consistent", report.max_deviation)
    d = ensembles[0].dim
    checks.add("average_is_maximally_mixed", float(np.max(np.abs(report.average - np.eye(d) / d))))
    mes = maximally_entangled(d)
    worst = 0.0
    for ens in ensembles:
        effects = steering.measurement_for_ensemble(ens)
        back = steering.steer(mes, effects)
        worst = max(worst, max(float(np.max(np.abs(a - b))) for a, b in zip(back.states, ens.states)),
                    max(abs(a - b) for a, b in zip(back.weights, ens.weights)))
    checks.add("measurement_round_trip", worst)
    q, _ = _xor_game_checks(game, strat, checks)
    doc = {"n": args.n, "dim": d, "settings": game.n_alice, "max_deviation": report.max_deviation,
           "quantum": q.value}
    return _result(doc, checks, args.format)


def _fig3_rows(theta: float):
    box, model = models.lhv_model(theta)
    rows = []
    for (s, a), (start, end) in sorted(model.arcs.items()):
        rows.append((s, a, models.CHSH_STRINGS[(s, a)], start, end, model.certainty(s, a)))
    return rows


def cmd_lhv(args) -> CommandResult:
    checks = Checks()
    theta = args.theta
    if not 0.0 <= theta <= math.pi:
        return CommandResult(2, "", f"--theta must lie in [0, pi], got {theta}\n")
    box, model = models.lhv_model(theta)
    game = games.make_chsh()
    value = games.box_value(game, box).value
    checks.add("box_no_signalling", models.is_no_signalling(box)[1], 1e-12)
    checks.add("value_three_quarters", abs(value - 0.75), 1e-12)
    checks.add("closed_form_three_quarters", abs(models.lhv_game_value(theta) - 0.75), 1e-12)
    z = model.zetas
    checks.add("zeta_same_parity", max(abs(z["00"] - (1 - theta / (2 * math.pi))), abs(z["11"] - (1 - theta / (2 * math.pi)))), 1e-12)
    checks.add("zeta_odd_parity", max(abs(z["01"] - (1 - (math.pi - theta) / (2 * math.pi))), abs(z["10"] - (1 - (math.pi - theta) / (2 * math.pi)))), 1e-12)
    states = model.steered_states()
    ens = [steering.Ensemble((0.5, 0.5), (states[(s, 0)], states[(s, 1)])) for s in range(2)]
    checks.add("hidden_variable_ensembles_consistent", steering.ensembles_consistent(ens).max_deviation)
    if args.format == "csv":
        return CommandResult(0 if checks.ok else 1, _csv(("s", "a", "x", "omega_start", "omega_end", "zeta"), _fig3_rows(theta)))
    doc = {"theta_b": theta, "value": value, "closed_form": models.lhv_game_value(theta),
           "zetas": z, "phi": [model.phi_0, model.phi_1], "box": box.to_json()}
    return _result(doc, checks, args.format)


def cmd_pr_box(args) -> CommandResult:
    checks = Checks()
    box = models.pr_box()
    game = games.make_chsh()
    value = games.box_value(game, box).value
    cert = games.box_certainties(game, box)
    ok, viol = models.is_no_signalling(box)
    checks.add("no_signalling", viol, 1e-15)
    checks.add("wins_chsh", abs(value - 1.0), 0.0)
    checks.add("no_uncertainty", max(abs(c - 1.0) for c in cert.values()), 0.0)
    checks.add("uniform_marginals", float(np.max(np.abs(box.alice_marginals() - 0.5))), 0.0)
    doc = {"value": value, "certainties": {models.CHSH_STRINGS[k]: v for k, v in sorted(cert.items())},
           "box": box.to_json()}
    return _result(doc, checks, args.format)


def _fig5_rows(samples: int):
    # the quantum CHSH point is always included
    rows = []
    for q in sorted(set(np.linspace(0.5, 1.0, samples).tolist()) | {TSIRELSON}):
        value, _ = complementarity.max_p_second(float(q))
        rows.append((float(q), value))
    return rows


def cmd_complementarity(args) -> CommandResult:
    checks = Checks()
    if args.curve:
        rows = _fig5_rows(args.samples)
        worst = max(abs(v - complementarity.max_p_second_grid(q)[0]) for q, v in rows)
        code = 0 if worst <= 1e-4 else 1
        return CommandResult(code, _csv(("q", "p_second_max"), rows))
    q = TSIRELSON if args.q is None else args.q
    if not 0.5 <= q <= 1.0:
        return CommandResult(2, "", f"--q must lie in [1/2, 1], got {q}\n")
    value, prr = complementarity.max_p_second(q)
    grid_value, _ = complementarity.max_p_second_grid(q)
    checks.add("grid_brute_force", abs(value - grid_value), 1e-4)
    quantum_point = complementarity.SequentialPoint(TSIRELSON, 0.5, 0.5)
    checks.add("quantum_point_parity", abs(complementarity.parity_residual(quantum_point)), 1e-12)
    # Bob's optimal CHSH measurements on the maximally certain state
    meas = uncertainty.MeasurementSet.from_observables([clifford.Z, clifford.X])
    rho = uncertainty.zeta_clifford([[0, 0, 1], [1, 0, 0]], [0.5, 0.5], "00").state
    eta = complementarity.post_measurement_certainty(rho, meas, (0, 0), "00")
    checks.add("eta_below_zeta", max(0.0, eta - TSIRELSON))
    doc = {"q": q, "p_second_max": value, "argmax_prr": prr, "pww": complementarity.induced_pww(q, prr) if q < 1 else None,
           "quantum_p_second": complementarity.p_second(TSIRELSON, 0.5), "eta_quantum": eta}
    return _result(doc, checks, args.format)


def cmd_ur2game(args) -> CommandResult:
    checks = Checks()
    n = args.n
    bob = games.retrieval_bob_vectors(n)
    p_t = np.full(n, 1.0 / n)
    meas = uncertainty.MeasurementSet.from_vectors(bob, p_t)
    rel = uncertainty.fine_grained_relation(meas)
    if args.partition == "singletons":
        partition = [[x] for x in uncertainty.bitstrings(n)]
    else:
        partition = _pairs_partition(n)
    game, bound = games.game_from_relation(rel, partition)
    doc = {"n": n, "partition": args.partition, "lower_bound": bound, "game": game.to_json()}
    if args.partition == "pairs":
        xor = game.as_xor()
        strat = games.optimal_clifford_strategy(xor, bob)
        value = games.quantum_value(xor, strat).value
        checks.add("lower_bound_attained", abs(value - bound))
        doc["xor_game"] = xor.to_json()
        doc["quantum"] = value
    checks.add("bound_at_most_max_zeta", max(0.0, bound - rel.max_zeta))
    return _result(doc, checks, args.format)


def emit_figure_data(which: str, theta: float = math.pi / 2, samples: int = 51) -> CommandResult:
    """CSV behind the hidden-variable circle (fig3), the parity tradeoff
    lines (fig4) and the best second-bit success (fig5)."""
    if which == "fig3":
        rows = _fig3_rows(theta)
        return CommandResult(0, _csv(("s", "a", "x", "omega_start", "omega_end", "zeta"), rows))
    if which == "fig4":
        rows = []
        for q in (0.5, 0.75, TSIRELSON, 1.0):
            for prr, pww in complementarity.tradeoff_curve(q, samples):
                rows.append((q, prr, pww))
        return CommandResult(0, _csv(("q", "prr", "pww"), rows))
    if which == "fig5":
        return CommandResult(0, _csv(("q", "p_second_max"), _fig5_rows(samples)))
    return CommandResult(2, "", f"unknown figure {which!r}; choose fig3, fig4 or fig5\n")


def cmd_figure(args) -> CommandResult:
    if args.which == "fig3" and not 0.0 <= args.theta <= math.pi:
        return CommandResult(2, "", f"--theta must lie in [0, pi], got {args.theta}\n")
    return emit_figure_data(args.which, args.theta, args.samples)


# --- dispatch ---------------------------------------------------------------


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _count(lo: int, hi: int | None = None):
    def parse(text: str) -> int:
        value = int(text)
        if value < lo or (hi is not None and value > hi):
            raise argparse.ArgumentTypeError(f"expected an integer in [{lo}, {hi if hi is not None else 'inf'}]")
        return value
    return parse


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = _Parser(prog="finegrain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("chsh", parents=[common], help="CHSH values under all theories")
    p.add_argument("--report", action="store_true")
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("retrieval", parents=[common], help="retrieval game of length n")
    p.add_argument("--n", type=_count(1, 10), required=True)
    p.add_argument("--values", action="store_true")
    p.set_defaults(func=cmd_retrieval)

    p = sub.add_parser("zeta", parents=[common], help="fine-grained relation")
    p.add_argument("--n", type=_count(1, 10), default=2)
    p.add_argument("--game", help="XOR game JSON; use Bob's measurements from the heuristic optimum")
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("steer-check", parents=[common], help="steering to maximally certain states")
    p.add_argument("--n", type=_count(2, 8), default=2)
    p.set_defaults(func=cmd_steer_check)

    p = sub.add_parser("lhv", parents=[common], help="hidden-variable circle model")
    p.add_argument("--theta", type=float, default=math.pi / 2)
    p.set_defaults(func=cmd_lhv)

    p = sub.add_parser("pr-box", parents=[common], help="PR box")
    p.set_defaults(func=cmd_pr_box)

    p = sub.add_parser("complementarity", parents=[common], help="sequential retrieval tradeoff")
    p.add_argument("--q", type=float)
    p.add_argument("--curve", action="store_true")
    p.add_argument("--samples", type=_count(2), default=51)
    p.set_defaults(func=cmd_complementarity)

    p = sub.add_parser("ur2game", parents=[common], help="game built from an uncertainty relation")
    p.add_argument("--n", type=_count(1, 10), default=2)
    p.add_argument("--partition", choices=("pairs", "singletons"), default="pairs")
    p.set_defaults(func=cmd_ur2game)

    p = sub.add_parser("figure", parents=[common], help="CSV data for fig3, fig4 or fig5")
    p.add_argument("which", choices=("fig3", "fig4", "fig5"))
    p.add_argument("--theta", type=float, default=math.pi / 2)
    p.add_argument("--samples", type=_count(2), default=51)
    p.set_defaults(func=cmd_figure)
    return parser


def run(argv) -> CommandResult:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except UsageError as exc:
        return CommandResult(2, "", str(exc) or parser.format_usage())
    try:
        return args.func(args)
    except (DensityMatrixError, NotHermitianError, steering.SteeringError, RuntimeError) as exc:
        return CommandResult(1, "", f"finegrain {args.command}: validation failed: {exc}\n")
    except (ValueError, OSError, KeyError, TypeError) as exc:
        return CommandResult(2, "", f"finegrain {args.command}: error: {exc}\n")


def main(argv=None) -> int:
    result = run(sys.argv[1:] if argv is None else argv)
    if result.payload:
        sys.stdout.write(result.payload)
    if result.stderr:
        sys.stderr.write(result.stderr)
    return result.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
