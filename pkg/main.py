#!/usr/bin/env python3
"""
Metric-Graph Divisor Toolkit

Command-line front end: loads a JSON workspace, runs one computation on a
named divisor, point or point set, and prints the result. Results go to
standard output, logs to standard error.

Exit codes: 0 success, 1 input error, 2 usage error, 3 internal defect
(including an exhausted iteration or search cap).
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from config import Config
from divisor import canonical_divisor
from errors import DivisorToolkitError
from metric_graph import PointRef, as_rational
from rank_engine import RankEngine
from rds_analyzer import RdsAnalyzer
from reduction_engine import dhar, is_reduced, move_step, reduce_effective, reduce_or_empty, support_locus
from workspace_io import Workspace, divisor_to_raw, load_workspace, point_to_raw, points_to_raw, to_json

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

_installed_handlers: List[logging.Handler] = []


def setup_logging(verbose: bool = False):
    """Log to standard error, and to ``Config.LOG_FILE`` when one is configured."""
    root = logging.getLogger()
    for handler in _installed_handlers:
        root.removeHandler(handler)
        handler.close()
    _installed_handlers.clear()
    handlers = [logging.StreamHandler(sys.stderr)]
    if Config.LOG_FILE:
        handlers.append(logging.FileHandler(Config.LOG_FILE))
    formatter = logging.Formatter(LOG_FORMAT)
    for handler in handlers:
        handler.setFormatter(formatter)
        root.addHandler(handler)
        _installed_handlers.append(handler)
    root.setLevel(logging.DEBUG if verbose else getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO))


@dataclass
class Outcome:
    lines: List[str]
    payload: Dict = field(default_factory=dict)
    exit_code: int = 0


def _base(args, workspace: Workspace) -> PointRef:
    if args.base:
        return workspace.resolve_point(args.base)
    return workspace.graph.vertex_points()[0]


# Commands

def cmd_validate(args, workspace: Workspace) -> Outcome:
    graph = workspace.graph
    return Outcome(
        [f"valid: {len(graph.vertices)} vertices, {len(graph.edges)} edges, genus {graph.genus}"],
        {'valid': True, 'vertices': len(graph.vertices), 'edges': len(graph.edges), 'genus': graph.genus,
         'graph': graph.to_raw()},
    )


def cmd_genus(args, workspace: Workspace) -> Outcome:
    return Outcome([f"genus {workspace.graph.genus}"], {'genus': workspace.graph.genus})


def cmd_canonical(args, workspace: Workspace) -> Outcome:
    canonical = canonical_divisor(workspace.graph)
    return Outcome(
        [f"K = {workspace.describe_divisor(canonical)}", f"degree {canonical.degree}"],
        {'divisor': divisor_to_raw(canonical), 'degree': canonical.degree},
    )


def cmd_reduce(args, workspace: Workspace) -> Outcome:
    divisor = workspace.divisor(args.divisor)
    base = _base(args, workspace)
    if divisor.is_effective:
        reduced, trace = reduce_effective(divisor, base, cap=args.cap)
        logger.info(f"Reduced after {trace.iterations} moves")
    else:
        result = reduce_or_empty(divisor, base, cap=args.cap)
        if result.certified_empty:
            return Outcome([f"|{args.divisor}| is empty (short {result.shortfall} at {workspace.label(result.failing_point)})"],
                           {'empty': True, 'failing_point': point_to_raw(result.failing_point),
                            'shortfall': result.shortfall})
        reduced = result.divisor
    lines = [f"{workspace.label(base)}-reduced form of {args.divisor}:"]
    lines += [f"  {coefficient:>3} ({workspace.label(point)})" for point, coefficient in reduced.items()]
    lines.append(f"degree {reduced.degree}")
    return Outcome(lines, {'empty': False, 'base': point_to_raw(base), 'divisor': divisor_to_raw(reduced),
                           'degree': reduced.degree})


def cmd_is_reduced(args, workspace: Workspace) -> Outcome:
    verdict = is_reduced(workspace.divisor(args.divisor), _base(args, workspace))
    return Outcome(['reduced' if verdict else 'not reduced'], {'reduced': verdict})


def cmd_dhar(args, workspace: Workspace) -> Outcome:
    outcome = dhar(workspace.divisor(args.divisor), _base(args, workspace))
    lines = [f"N{k} = {workspace.describe_points(layer)}" for k, layer in enumerate(outcome.burn_layers)]
    lines.append(f"S = {workspace.describe_points(outcome.output_set)}")
    return Outcome(lines, {
        'layers': [points_to_raw(sorted(layer)) for layer in outcome.burn_layers],
        'output_set': points_to_raw(sorted(outcome.output_set)),
        'reduced': outcome.is_reduced,
    })


def cmd_move_step(args, workspace: Workspace) -> Outcome:
    divisor = workspace.divisor(args.divisor)
    base = _base(args, workspace)
    if args.set:
        output_set = workspace.point_set(args.set)
    else:
        output_set = dhar(divisor, base).output_set
        if not output_set:
            return Outcome([f"{args.divisor} is already {workspace.label(base)}-reduced; nothing to move"], {'moved': False})
    move = move_step(divisor, output_set, base, t=as_rational(args.t, '--t'))
    lines = []
    for k, component in enumerate(move.components, start=1):
        lines.append(f"component {k}: {component.component.describe()} travels {component.distance}")
    lines.append(f"result = {workspace.describe_divisor(move.result)}")
    return Outcome(lines, {
        'moved': True,
        'components': [
            {'distance': str(c.distance), 'debits': [dict(point_to_raw(p), coeff=n) for p, n in c.debits],
             'landings': divisor_to_raw(c.landings)}
            for c in move.components
        ],
        'result': divisor_to_raw(move.result),
    })


def cmd_rank(args, workspace: Workspace) -> Outcome:
    engine = RankEngine(workspace.graph, cap=args.cap)
    base_set = workspace.point_set(args.set) if args.set else None
    report = engine.rank(workspace.divisor(args.divisor), base_set, shortcut=args.rr_shortcut or None)
    lines = [f"r({args.divisor}) = {report.rank}"]
    if report.failing_witness is not None:
        lines.append(f"fails at E = {workspace.describe_divisor(report.failing_witness)}")
    return Outcome(lines, {'rank': report.rank, 'failing_witness':
                           divisor_to_raw(report.failing_witness) if report.failing_witness is not None else None})


def cmd_restricted_rank(args, workspace: Workspace) -> Outcome:
    engine = RankEngine(workspace.graph, cap=args.cap)
    report = engine.restricted_rank(workspace.divisor(args.divisor), workspace.point_set(args.set))
    return Outcome([f"r_{args.set}({args.divisor}) = {report.rank}"], {'rank': report.rank})


def cmd_empty_check(args, workspace: Workspace) -> Outcome:
    nonempty, witness = RankEngine(workspace.graph, cap=args.cap).linear_system_nonempty(
        workspace.divisor(args.divisor))
    if not nonempty:
        return Outcome([f"|{args.divisor}| is empty"], {'empty': True})
    return Outcome([f"|{args.divisor}| contains {workspace.describe_divisor(witness)}"], {'empty': False, 'witness': divisor_to_raw(witness)})


def cmd_support_locus(args, workspace: Workspace) -> Outcome:
    result = support_locus(workspace.divisor(args.divisor), cap=args.cap)
    lines = [f"supp|{args.divisor}| = {result.locus.describe()}"]
    lines += [f"special region {region.describe()}" for region in result.regions]
    return Outcome(lines, {
        'locus_vertices': points_to_raw(sorted(result.locus.vertices)),
        'regions': [points_to_raw(sorted(region.interior_vertices)) for region in result.regions],
    })


def cmd_rr_check(args, workspace: Workspace) -> Outcome:
    report = RankEngine(workspace.graph, cap=args.cap).rr_verify(workspace.divisor(args.divisor))
    relation = '=' if report.equal else '!='
    status = 'OK' if report.equal else 'MISMATCH'
    return Outcome(
        [f"lhs {report.lhs} {relation} rhs {report.rhs}: {status}"],
        {'rank': report.rank, 'dual_rank': report.dual_rank, 'lhs': report.lhs, 'rhs': report.rhs,
         'equal': report.equal},
        exit_code=0 if report.equal else 3,
    )


def cmd_is_rds(args, workspace: Workspace) -> Outcome:
    verdict = RdsAnalyzer(workspace.graph).is_rank_determining(workspace.point_set(args.set))
    if verdict.is_rds:
        return Outcome([f"{args.set} is rank-determining"], {'rds': True})
    return Outcome(
        [f"{args.set} is not rank-determining",
         f"special region {verdict.witness.region.describe()} avoids it",
         f"witness divisor {workspace.describe_divisor(verdict.witness_divisor)}"],
        {'rds': False, 'region': points_to_raw(sorted(verdict.witness.vertices)),
         'witness_divisor': divisor_to_raw(verdict.witness_divisor)},
    )


def cmd_l_closure(args, workspace: Workspace) -> Outcome:
    closure = RdsAnalyzer(workspace.graph).l_closure(workspace.point_set(args.set))
    return Outcome([f"L({args.set}) = {closure.describe()}"], {
        'whole': closure.is_whole,
        'vertices': points_to_raw(sorted(closure.vertices)),
    })


def cmd_rds_witness(args, workspace: Workspace) -> Outcome:
    verdict = RdsAnalyzer(workspace.graph).is_rank_determining(workspace.point_set(args.set))
    if verdict.is_rds:
        return Outcome([f"no witness: {args.set} is rank-determining"], {'witness_divisor': None})
    return Outcome([f"D_W = {workspace.describe_divisor(verdict.witness_divisor)}"], {'witness_divisor': divisor_to_raw(verdict.witness_divisor)})


def cmd_min_rds_check(args, workspace: Workspace) -> Outcome:
    verdict = RdsAnalyzer(workspace.graph).is_minimal_rds(workspace.point_set(args.set))
    if verdict.minimal:
        return Outcome([f"{args.set} is a minimal rank-determining set"], {'minimal': True, 'removable': []})
    return Outcome(
        [f"{args.set} is not minimal; removable: {workspace.describe_points(verdict.removable)}"],
        {'minimal': False, 'removable': points_to_raw(verdict.removable)},
    )


def cmd_rds_construct(args, workspace: Workspace) -> Outcome:
    base = workspace.resolve_point(args.base) if args.base else None
    points = RdsAnalyzer(workspace.graph).construct_rds_spanning(base=base)
    return Outcome([f"{workspace.describe_points(points)} ({len(points)} points, genus {workspace.graph.genus})"],
                   {'set': points_to_raw(points)})


def cmd_min_rds_search(args, workspace: Workspace) -> Outcome:
    found = RdsAnalyzer(workspace.graph).minimal_rds_search(workspace.point_set(args.set), args.max_size)
    lines = [workspace.describe_points(points) for points in found] or ['none found']
    return Outcome(lines, {'sets': [points_to_raw(points) for points in found]})


def cmd_fg_rank(args, workspace: Workspace) -> Outcome:
    value = RankEngine(workspace.graph, cap=args.cap).fg_rank(workspace.divisor(args.divisor))
    return Outcome([f"r_G({args.divisor}) = {value}"], {'rank': value})


COMMANDS: Dict[str, Callable] = {
    'validate': cmd_validate,
    'genus': cmd_genus,
    'canonical': cmd_canonical,
    'reduce': cmd_reduce,
    'is-reduced': cmd_is_reduced,
    'dhar': cmd_dhar,
    'move-step': cmd_move_step,
    'rank': cmd_rank,
    'restricted-rank': cmd_restricted_rank,
    'empty-check': cmd_empty_check,
    'support-locus': cmd_support_locus,
    'rr-check': cmd_rr_check,
    'is-rds': cmd_is_rds,
    'l-closure': cmd_l_closure,
    'rds-witness': cmd_rds_witness,
    'min-rds-check': cmd_min_rds_check,
    'rds-construct': cmd_rds_construct,
    'min-rds-search': cmd_min_rds_search,
    'fg-rank': cmd_fg_rank,
}

NEEDS_DIVISOR = {'reduce', 'is-reduced', 'dhar', 'move-step', 'rank', 'restricted-rank', 'empty-check',
                 'support-locus', 'rr-check', 'fg-rank'}
NEEDS_SET = {'restricted-rank', 'is-rds', 'l-closure', 'rds-witness', 'min-rds-check', 'min-rds-search'}
TAKES_BASE = {'reduce', 'is-reduced', 'dhar', 'move-step', 'rds-construct'}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Metric-Graph Divisor Toolkit',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py dhar --input fixtures/fig2.json --divisor D2 --base v0
  python main.py reduce --input fixtures/fig2.json --divisor D2 --base v0 --json
  python main.py is-rds --input fixtures/k4.json --set A
        """
    )
    commands = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')
    for name in COMMANDS:
        sub = commands.add_parser(name)
        sub.add_argument('--input', required=True, help='Workspace JSON file')
        sub.add_argument('--json', action='store_true', help='Print machine-readable JSON')
        sub.add_argument('--cap', type=int, default=None,
                         help='Iteration or search cap (overrides TDL_CAP and the defaults)')
        sub.add_argument('--verbose', '-v', action='store_true', help='Enable verbose logging')
        if name in NEEDS_DIVISOR:
            sub.add_argument('--divisor', required=True, help='Name of a divisor in the workspace')
        if name in NEEDS_SET:
            sub.add_argument('--set', required=True, help='Name of a point set in the workspace')
        elif name in ('rank', 'move-step'):
            sub.add_argument('--set', default=None,
                             help='Vertex set for rank / the set S for a move (default: Ω / Dhar output)')
        if name in TAKES_BASE:
            sub.add_argument('--base', default=None, help='Base point: a named point, vertex id or edge@offset')
        if name == 'rank':
            sub.add_argument('--rr-shortcut', action='store_true',
                             help='Use deg(D) - g when deg(D) > 2g - 2')
        if name == 'validate':
            sub.add_argument('--subdivide-loops', action='store_true',
                             help='Insert a midpoint vertex into every loop edge')
        if name == 'move-step':
            sub.add_argument('--t', default='1', help='Move time in (0, 1] (default: 1)')
        if name == 'min-rds-search':
            sub.add_argument('--max-size', type=int, default=3, help='Largest subset size to try (default: 3)')
    return parser


def run_command(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        return int(exit_request.code or 0)

    setup_logging(args.verbose)
    if args.cap is not None and args.cap < 0:
        logger.error("--cap must be nonnegative")
        return 2
    previous_override = Config.CAP_OVERRIDE
    if args.cap is not None:
        Config.CAP_OVERRIDE = args.cap

    try:
        logger.info(f"Running {args.command} on {args.input}")
        workspace = load_workspace(args.input, subdivide_loops=getattr(args, 'subdivide_loops', False))
        outcome = COMMANDS[args.command](args, workspace)
        logger.info(f"Finished {args.command} with exit code {outcome.exit_code}")
        if args.json:
            out.write(to_json(outcome.payload))
        else:
            out.write('\n'.join(outcome.lines) + '\n')
        return outcome.exit_code
    except KeyboardInterrupt:
        logger.info("\nInterrupted by user")
        return 1
    except DivisorToolkitError as e:
        logger.error(f"{type(e).__name__}: {e}")
        if args.verbose:
            import traceback
            traceback.print_exc()
        return e.exit_code
    except Exception as e:
        logger.error(f"An internal error occurred: {e}")
        if args.verbose:
            import traceback
            traceback.print_exc()
        return 3
    finally:
        Config.CAP_OVERRIDE = previous_override


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
