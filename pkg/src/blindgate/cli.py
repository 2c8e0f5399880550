"""Command-line front end.

Runs circuit files through the helper protocols, audits what the helper
gets to see, spot-checks helper honesty, classifies gates, and walks the
classical blinding demo.  One seed (--seed, else $BLINDGATE_SEED, else 0)
drives every source of randomness, so a fixed command line reproduces its
report byte for byte.

Exit codes: 0 success, 1 a verification failed, 2 bad input or usage,
3 the helper walked away mid-protocol.
"""

import argparse
import os
import sys
from collections import Counter

import numpy as np

from . import classical, hierarchy, honesty, protocols, security
from . import simulator as sim
from .errors import (
    BlindgateError,
    MalformedWitnessError,
    PreconditionError,
    ProtocolAbort,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_ABORT = 3

SECURITY_TOL = 1e-9


def _resolve_seed(value):
    if value is not None:
        return value
    raw = os.environ.get("BLINDGATE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise PreconditionError(f"BLINDGATE_SEED must be an integer, got {raw!r}") from None


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _bits(bits) -> str:
    return "".join(str(int(b)) for b in bits)


def _parse_matrix(text: str) -> np.ndarray:
    """One row per line, entries like `0.5-0.5i`, whitespace separated."""
    rows = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        row = []
        for token in line.split():
            try:
                row.append(complex(token.replace("i", "j")))
            except ValueError:
                raise PreconditionError(
                    f"matrix line {line_no}: bad entry {token!r}"
                ) from None
        rows.append(row)
    if not rows:
        raise PreconditionError("matrix file holds no rows")
    if any(len(row) != len(rows) for row in rows):
        raise PreconditionError("matrix must be square, one row per line")
    return np.array(rows, dtype=complex)


def cmd_run(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.shots < 0:
        raise PreconditionError("--shots must be non-negative")
    circuit = protocols.parse_circuit(_read_text(args.circuit))
    measured = circuit.measured_qubits()
    rng = sim.Rng(seed)
    bob = protocols.make_bob(args.bob, seed)
    lines = [
        f"circuit: {args.circuit} (qubits: {circuit.n_qubits}, ops: {len(circuit.ops)})",
        f"mode: {args.mode}  bob: {args.bob}  seed: {seed}",
    ]
    try:
        runs = [
            protocols.run_circuit(
                circuit, bob, mode=args.mode, tape=protocols.SampledTape(rng.derive(i))
            )
            for i in range(max(args.shots, 1))
        ]
        exact = None
        if args.shots == 0 and measured:
            # blind mode pads with many coin flips per cycle; enumerating
            # them all is hopeless, so condition on one seeded coin stream
            # there and fork only on measurement outcomes
            coin_seed = seed if args.mode == "blind" else None
            exact = security.delegated_outcome_distribution(
                circuit,
                bob_name=args.bob,
                bob_seed=seed,
                mode=args.mode,
                coin_seed=coin_seed,
            )
    except ProtocolAbort as abort:
        print("\n".join(lines))
        print(f"protocol aborted: {abort}")
        if abort.transcript is not None and abort.transcript.rounds:
            print("\n".join(abort.transcript.records()))
        return EXIT_ABORT
    rep = runs[0]

    if args.format == "records":
        out = list(rep.transcript.records())
        if exact is not None:
            out.extend(f"outcome={_bits(k)} p={exact[k]:.12f}" for k in sorted(exact))
        elif args.shots and measured:
            order = measured
            out.extend(
                f"shot={i} outcome={_bits(tuple(r.measurements[q] for q in order))}"
                for i, r in enumerate(runs)
            )
        print("\n".join(out))
        return EXIT_OK

    labels = rep.transcript.labels()
    lines.append(
        f"transcript: {len(labels)} rounds, requests "
        + (",".join(labels) if labels else "(none)")
    )
    if args.mode == "blind":
        lines.append(f"blind schedule: {rep.cycles} cycles, {rep.gate_slots} gate requests")
    if exact is not None:
        lines.append(
            "exact outcome distribution (qubits " + ", ".join(map(str, measured)) + "):"
        )
        lines.extend(f"  {_bits(k)}  {exact[k]:.12f}" for k in sorted(exact))
    elif args.shots and measured:
        counts = Counter(tuple(r.measurements[q] for q in measured) for r in runs)
        lines.append(
            f"sampled outcomes over {args.shots} shots "
            "(qubits " + ", ".join(map(str, measured)) + "):"
        )
        lines.extend(f"  {_bits(k)}  {counts[k]}" for k in sorted(counts))
    elif not measured:
        lines.append("no measurements in the program")
    if args.bob == "honest" and not measured and rep.state is not None:
        fid = sim.fidelity(rep.state, protocols.ideal_final_state(circuit))
        lines.append(f"fidelity vs direct simulation: {fid:.12f}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_verify_security(args) -> int:
    seed = _resolve_seed(args.seed)
    lines = []
    if args.target in protocols.PROTOCOLS:
        spec = protocols.PROTOCOLS[args.target]
        states = security.probe_states(spec.n_wires, count=8, seed=seed)
        labels: dict[int, str] = {}
        worst_by_round: dict[int, float] = {}
        for state in states:
            for idx, (label, rho) in enumerate(
                security.bob_views(spec, state, args.bob, seed)
            ):
                labels[idx] = label
                defect = security.mixing_defect(rho)
                worst_by_round[idx] = max(worst_by_round.get(idx, 0.0), defect)
        lines.append(
            f"security check: protocol {spec.name}, "
            f"{len(states)} probe states, helper {args.bob}"
        )
        lines.extend(
            f"  round {idx} request={labels[idx]} worst mixing defect {worst_by_round[idx]:.3e}"
            for idx in sorted(worst_by_round)
        )
        worst = max(worst_by_round.values())
    elif os.path.exists(args.target):
        circuit = protocols.parse_circuit(_read_text(args.target))
        report = security.transcript_blindness(circuit, circuit, args.bob, seed)
        lines.append(f"security check: circuit {args.target}, helper {args.bob}")
        lines.append(
            f"  blind schedule: {report.cycles} cycles, {report.gate_slots} gate requests"
        )
        worst = report.max_mixing_defect
    else:
        raise PreconditionError(
            f"{args.target!r} is neither a protocol ("
            + ", ".join(protocols.PROTOCOLS)
            + ") nor a circuit file"
        )
    ok = worst <= args.tol
    lines.append(
        ("PASS" if ok else "FAIL")
        + f": worst defect {worst:.3e} against tolerance {args.tol:.1e}"
    )
    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_classify(args) -> int:
    if args.gate and args.matrix:
        raise PreconditionError("give a gate name or --matrix, not both")
    if args.classical:
        if args.matrix or not args.gate:
            raise PreconditionError("--classical takes a named reversible gate")
        name = args.gate.upper()
        if name not in classical.NAMED_CLASSICAL:
            raise PreconditionError(
                f"unknown classical gate {args.gate!r}; choices: "
                + ", ".join(sorted(classical.NAMED_CLASSICAL))
            )
        level = classical.tilde_level(classical.NAMED_CLASSICAL[name], max_k=args.max_k)
        head = f"level {level}" if level else f"beyond level {args.max_k}"
        print(f"classical gate {name}: {head}")
        return EXIT_OK
    if args.matrix:
        unitary = _parse_matrix(_read_text(args.matrix))
        label = args.matrix
    elif args.gate:
        name = args.gate.upper()
        if name not in hierarchy.NAMED_GATES:
            raise PreconditionError(
                f"unknown gate {args.gate!r}; choices: "
                + ", ".join(sorted(hierarchy.NAMED_GATES))
            )
        unitary = hierarchy.NAMED_GATES[name].unitary
        label = name
    else:
        raise PreconditionError("classify needs a gate name or --matrix FILE")
    verdict = hierarchy.classify(unitary, max_k=args.max_k)
    print(f"gate {label}: " + "\n".join(verdict.render()))
    return EXIT_OK


def cmd_honesty(args) -> int:
    seed = _resolve_seed(args.seed)
    bob = protocols.make_bob(args.adversary, seed)
    report = honesty.spot_check(
        bob, args.gate, trials=args.trials, threshold=args.threshold, seed=seed
    )
    lines = report.records() if args.format == "records" else report.render()
    print("\n".join(lines))
    return EXIT_FAIL if report.detected else EXIT_OK


def cmd_np_check(args) -> int:
    if args.sat:
        if args.numbers:
            raise PreconditionError("give numbers or --sat, not both")
        if not args.assignment or set(args.assignment) - {"0", "1"}:
            raise PreconditionError("--sat needs --assignment with a string of 0s and 1s")
        instance = classical.parse_dimacs(_read_text(args.sat))
        witness = tuple(int(c) for c in args.assignment)
        label = f"{args.sat} under {args.assignment}"
    else:
        if len(args.numbers) < 2:
            raise PreconditionError(
                "np-check takes an instance and its factors, e.g. np-check 15 3 5"
            )
        instance = args.numbers[0]
        witness = tuple(args.numbers[1:])
        label = f"{instance} = " + " x ".join(str(f) for f in witness)
    try:
        good = honesty.verify_np_answer(instance, witness)
    except MalformedWitnessError as exc:
        print(f"malformed witness: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(("verified: " if good else "NOT verified: ") + label)
    return EXIT_OK if good else EXIT_FAIL


def cmd_blind_sat_demo(args) -> int:
    seed = _resolve_seed(args.seed)
    rng = sim.Rng(seed)
    if args.cnf:
        formula = classical.parse_dimacs(_read_text(args.cnf))
        source = args.cnf
    else:
        formula, _ = classical.planted_formula(args.vars, args.clauses, rng.derive(0))
        source = f"random satisfiable instance, seed {seed}"
    print(
        f"instance: {source} "
        f"(variables: {formula.n_vars}, clauses: {len(formula.clauses)})"
    )
    blinded, mask = classical.blind_sat(formula, rng.derive(1))
    print(f"blinding mask (kept secret from the solver): {_bits(mask)}")
    answer = classical.brute_force_sat(blinded)
    if answer is None:
        print("solver: no satisfying assignment exists")
        return EXIT_FAIL
    print(f"solver's answer to the blinded instance:     {_bits(answer)}")
    recovered = classical.unblind_assignment(answer, mask)
    print(f"unblinded assignment:                        {_bits(recovered)}")
    good = honesty.verify_np_answer(formula, recovered)
    print("original instance satisfied: " + ("yes" if good else "NO"))
    return EXIT_OK if good else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blindgate",
        description="Delegate quantum gates to an untrusted helper over "
        "one-time-padded wires; audit what the helper can see and whether "
        "it behaved.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    strategies = sorted(protocols.BOB_FACTORIES)

    def add_seed(p):
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help="randomness seed (default: $BLINDGATE_SEED, else 0)",
        )

    run = sub.add_parser(
        "run",
        help="execute a circuit file through the helper",
        description="Circuit lines: `H q`, `T q`, `CNOT control target`, "
        "`M q`; `#` starts a comment.  With --shots 0 the exact outcome "
        "distribution is computed by replaying every randomness branch, "
        "which suits small circuits; sample large ones instead.",
    )
    run.add_argument("circuit", help="circuit file")
    run.add_argument("--bob", default="honest", choices=strategies, help="helper strategy")
    run.add_argument("--mode", default="plain", choices=("plain", "blind"))
    run.add_argument(
        "--shots",
        type=int,
        default=0,
        help="sampled runs; 0 means the exact distribution (default)",
    )
    run.add_argument("--format", default="text", choices=("text", "records"))
    add_seed(run)
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser(
        "verify-security",
        help="check that every payload the helper sees is maximally mixed",
        description="Target is a protocol name ("
        + ", ".join(protocols.PROTOCOLS)
        + ") checked over assorted probe inputs, or a circuit file run "
        "blind and checked round by round.",
    )
    ver.add_argument("target")
    ver.add_argument("--bob", default="honest", choices=strategies)
    ver.add_argument("--tol", type=float, default=SECURITY_TOL)
    add_seed(ver)
    ver.set_defaults(func=cmd_verify_security)

    cls = sub.add_parser(
        "classify",
        help="conjugation-hierarchy level of a gate",
        description="Named gates: "
        + ", ".join(sorted(hierarchy.NAMED_GATES))
        + ".  Matrix files hold one row per line with entries like 0.5-0.5i.",
    )
    cls.add_argument("gate", nargs="?", help="named gate, e.g. T")
    cls.add_argument("--matrix", help="classify the unitary in this file instead")
    cls.add_argument("--max-k", type=int, default=4, dest="max_k")
    cls.add_argument(
        "--classical",
        action="store_true",
        help="use the reversible-gate ladder (named gates: "
        + ", ".join(sorted(classical.NAMED_CLASSICAL))
        + ")",
    )
    cls.set_defaults(func=cmd_classify)

    hon = sub.add_parser(
        "honesty",
        help="spot-check a helper strategy against the honest gate",
    )
    hon.add_argument("--gate", default="H", choices=("MEASURE", "H", "T", "CNOT"))
    hon.add_argument("--adversary", default="honest", choices=strategies)
    hon.add_argument("--trials", type=int, default=honesty.DEFAULT_TRIALS)
    hon.add_argument("--threshold", type=float, default=honesty.DEFAULT_THRESHOLD)
    hon.add_argument("--format", default="text", choices=("text", "records"))
    add_seed(hon)
    hon.set_defaults(func=cmd_honesty)

    npc = sub.add_parser(
        "np-check",
        help="verify a claimed NP witness outright",
        description="Either `np-check 15 3 5` (instance then factors) or "
        "`np-check --sat FILE --assignment 0101`.",
    )
    npc.add_argument("numbers", nargs="*", type=int)
    npc.add_argument("--sat", help="DIMACS CNF file")
    npc.add_argument("--assignment", help="0/1 assignment string for --sat")
    npc.set_defaults(func=cmd_np_check)

    demo = sub.add_parser(
        "blind-sat-demo",
        help="blind a SAT instance, hand it to a solver, unblind the answer",
    )
    demo.add_argument("--vars", type=int, default=8)
    demo.add_argument("--clauses", type=int, default=24)
    demo.add_argument("--cnf", help="use this DIMACS file instead of a random instance")
    add_seed(demo)
    demo.set_defaults(func=cmd_blind_sat_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return EXIT_OK if code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except ProtocolAbort as abort:
        print(f"protocol aborted: {abort}", file=sys.stderr)
        return EXIT_ABORT
    except (BlindgateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
