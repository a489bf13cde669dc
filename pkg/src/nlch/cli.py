"""``nlch`` command line: run | converge | bench | kernel-info."""
import argparse
import logging
import sys
from pathlib import Path

from . import experiments as ex
from . import io
from .integrators import SCHEMES

log = logging.getLogger("nlch")

COMMANDS = ("run", "converge", "bench", "kernel-info")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nlch", description="Nonlocal Cahn-Hilliard ESI-SAV solver")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value config file")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--schemes", default=None,
                   help="converge: comma-separated scheme list or 'all'")
    p.add_argument("--levels", default=None, help="converge/bench: first,last refinement level n (T_n = 2^n)")
    p.add_argument("--repeats", type=int, default=1, help="bench: keep the fastest of this many runs")
    # every config key can be overridden by a flag of the same name
    for key in ex.CONFIG_KEYS:
        p.add_argument(f"--{key}", dest=f"cfg_{key}", default=None, metavar="VALUE")
    return p


def _levels(text, default):
    if text is None:
        return default
    a, b = (int(s) for s in text.split(","))
    return range(a, b + 1)


def load_config(args) -> ex.RunConfig:
    values = io.read_config(args.config) if args.config else {}
    for key in ex.CONFIG_KEYS:
        v = getattr(args, f"cfg_{key}")
        if v is not None:
            values[key] = v
    if "solver" in values:
        values["solver"] = values["solver"].strip().lower()
    return ex.build_config(values)


def cmd_run(rc: ex.RunConfig) -> None:
    def progress(h):
        if h.n % 1000 == 0:
            log.info("step %d t=%.3f R=%.6g", h.n, h.t, h.sav.R)

    rec = ex.simulate(rc, progress=progress)
    out = ex.write_outputs(rc, rec)
    print(f"steps={rec.steps} t={rec.t:.6g} steady_time={rec.steady_time} "
          f"E_final={rec.rows[-1][2]:.10g} wall={rec.wall_time:.2f}s out={out}")


def cmd_converge(rc: ex.RunConfig, schemes, levels) -> None:
    tables = ex.converge_study(rc, schemes, levels)
    out = Path(rc.out)
    out.mkdir(parents=True, exist_ok=True)
    ex.write_rates_csv(out / "rates.csv", tables)
    for tb in tables:
        print(tb.scheme, " ".join(f"{r:.4f}" for r in tb.rates))


def cmd_bench(rc: ex.RunConfig, levels, repeats) -> None:
    rows = ex.bench_solvers(rc, solvers=("fs", "ds") if rc.solver != "ds" else ("ds",), levels=levels,
                            repeats=repeats)
    out = Path(rc.out)
    out.mkdir(parents=True, exist_ok=True)
    ex.write_bench_csv(out / "bench.csv", rows)
    for r in rows:
        print(f"{r.solver} N={r.N} steps={r.steps} {r.seconds:.3f}s cg={r.mean_cg_iterations:.2f}")


def cmd_kernel_info(rc: ex.RunConfig) -> None:
    info = ex.kernel_info(rc)
    print(",".join(info))
    print(",".join(io.fmt(v) for v in info.values()))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        rc = load_config(args)
        if args.schemes is None or args.schemes == "all":
            schemes = SCHEMES
        else:
            schemes = tuple(s.strip().upper() for s in args.schemes.split(","))
            bad = [s for s in schemes if s not in SCHEMES]
            if bad:
                raise UsageError(f"unknown scheme(s): {', '.join(bad)}")
    except (UsageError, io.ConfigError, OSError) as exc:
        print(exc, file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            cmd_run(rc)
        elif args.command == "converge":
            cmd_converge(rc, schemes, _levels(args.levels, range(3, 9)))
        elif args.command == "bench":
            cmd_bench(rc, _levels(args.levels, range(3, 7)), args.repeats)
        else:
            cmd_kernel_info(rc)
    except Exception as exc:  # noqa: BLE001 - report any runtime failure as exit 1
        log.debug("failure", exc_info=True)
        print(f"nlch {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
