"""Command-line front end: mask generation, response grids, metrics, selftest.

Every output file starts with a comment header carrying the tool version,
the canonical form of the run configuration and the master seed; re-running
that configuration reproduces the numeric payload byte for byte.

Exit codes: 0 success, 2 configuration error, 3 numeric contract failure,
4 I/O error.
"""

from __future__ import annotations

import csv
import os
import re
import shlex
import sys
import time

import numpy as np

from . import __version__, masks, metrics, montecarlo, response, spectra

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

BUDGET_ENV = "MASKRD_MC_BUDGET"


# ---------------------------------------------------------------- helpers

def parse_index_set(text: str) -> tuple:
    """Expand index-set syntax: comma list of "a", "a..b" or "a..b:s"."""
    out = []
    compact = "".join(text.split())
    if not compact:
        raise ValueError("empty index set")
    for seg in compact.split(","):
        body, _, stride_txt = seg.partition(":")
        stride = 1
        if stride_txt:
            stride = int(stride_txt)
            if stride < 1:
                raise ValueError(f"stride must be positive in {seg!r}")
        if ".." in body:
            a_txt, _, b_txt = body.partition("..")
            a, b = int(a_txt), int(b_txt)
            if b < a:
                raise ValueError(f"empty range {seg!r}")
            out.extend(range(a, b + 1, stride))
        else:
            out.append(int(body))
    return tuple(out)


def canonical_index_set(text: str) -> str:
    parse_index_set(text)
    return "".join(text.split())


def mask_from_arg(text: str) -> masks.Mask:
    head = text.partition(":")[0].strip().lower()
    if head in ("singer", "comb", "random"):
        return masks.from_spec(text)
    if os.path.exists(text):
        return masks.load_mask(text)
    raise ValueError(
        f"mask argument {text!r} is neither a family spec nor an existing file")


def canonical_config(command: str, options: dict) -> str:
    """Canonical one-line form of a run: subcommand plus sorted flags."""
    parts = command.split()
    for key in sorted(options):
        value = options[key]
        if value is None:
            continue
        values = value if isinstance(value, (list, tuple)) else [value]
        for v in values:
            parts.append(f"--{key}")
            parts.append(shlex.quote(str(v)))
    return " ".join(parts)


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.11e}"
    return str(value)


def write_csv(path, columns, rows, config_str: str, seed) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"# tool: maskrd {__version__}\n")
        fh.write(f"# config: {config_str}\n")
        fh.write(f"# seed: {seed}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(c) for c in row])


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_")


def _resolve_budget(args) -> int:
    if getattr(args, "budget", None) is not None:
        return args.budget
    env = os.environ.get(BUDGET_ENV)
    if env:
        return int(env)
    return montecarlo.DEFAULT_BUDGET


def _resolve_mu4(args) -> float:
    if getattr(args, "mu4", None) is not None:
        return args.mu4
    if getattr(args, "constellation", None):
        return montecarlo.make_constellation(args.constellation).mu4
    raise ValueError("supply --mu4 or --constellation")


# ---------------------------------------------------------------- commands

def cmd_mask(args) -> int:
    options = {"out": args.out}
    config = canonical_config(
        f"mask {args.action} {shlex.quote(args.spec)}", options)
    if args.action == "gen":
        mask = masks.from_spec(args.spec)
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            path = os.path.join(args.out, _slug(mask.label) + ".mask")
            masks.save_mask(mask, path, header_lines=(
                f"tool: maskrd {__version__}", f"config: {config}", "seed: 0"))
            print(f"wrote {path}")
        else:
            print(masks.serialize_mask(mask))
        return EXIT_OK

    mask = mask_from_arg(args.spec)
    check = masks.verify_cds(mask)
    if args.action == "show":
        print(masks.serialize_mask(mask))
    print(f"label: {mask.label}")
    print(f"N: {mask.n}")
    print(f"weight: {mask.weight}")
    print(f"rho: {mask.rho.numerator}/{mask.rho.denominator}")
    print(f"is_cds: {int(check.is_cds)}")
    print(f"lambda: {'' if check.lam is None else check.lam}")
    if args.action == "verify":
        spacing = masks.comb_spacing(mask)
        if spacing is not None:
            print(f"structure: comb (d={spacing})")
        elif check.is_cds:
            print("structure: cyclic difference set")
        else:
            print("structure: irregular")
        a = spectra.autocorr(mask)
        print("k,a")
        for k in range(mask.n):
            print(f"{k},{int(a[k])}")
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            slug = _slug(mask.label)
            a_path = os.path.join(args.out, f"{slug}_autocorr.csv")
            write_csv(a_path, ("k", "a"),
                      [(k, int(a[k])) for k in range(mask.n)], config, 0)
            r = spectra.cross_term_matrix(mask)
            r_path = os.path.join(args.out, f"{slug}_crossterms.csv")
            write_csv(r_path, ("k", "l", "R"),
                      [(k, l, int(r[k, l]))
                       for k in range(1, mask.n) for l in range(1, mask.n)],
                      config, 0)
            print(f"wrote {a_path}")
            print(f"wrote {r_path}")
    return EXIT_OK


def _response_options(args) -> dict:
    opts = {
        "mask": args.mask,
        "M": args.M,
        "k": canonical_index_set(args.k),
        "l": canonical_index_set(args.l) if args.l else canonical_index_set(args.k),
        "nu": canonical_index_set(args.nu),
        "out": args.out,
    }
    if args.mode in ("mc", "both"):
        opts["constellation"] = args.constellation
        opts["trials"] = args.trials
        opts["seed"] = args.seed
        opts["budget"] = args.budget
    else:
        opts["constellation"] = args.constellation
        opts["mu4"] = args.mu4
    return opts


def cmd_response(args) -> int:
    mask = mask_from_arg(args.mask)
    k_set = parse_index_set(args.k)
    l_set = parse_index_set(args.l) if args.l else k_set
    nu_set = parse_index_set(args.nu)
    config = canonical_config(f"response {args.mode}", _response_options(args))
    os.makedirs(args.out, exist_ok=True)

    if args.mode == "closed":
        mu4 = _resolve_mu4(args)
        grid = response.build_grid(
            response.ScenarioParams(mask=mask, M=args.M, mu4=mu4),
            k_set, l_set, nu_set)
        path = os.path.join(args.out, "response_closed.csv")
        write_csv(path, response.GRID_HEADER_CLOSED, response.grid_rows(grid),
                  config, 0)
        print(f"wrote {path}")
        return EXIT_OK

    if not args.constellation:
        raise ValueError("Monte Carlo runs need --constellation")
    if args.mu4 is not None:
        raise ValueError(
            "Monte Carlo runs take mu4 from the constellation; drop --mu4")
    constellation = montecarlo.make_constellation(args.constellation)
    budget = _resolve_budget(args)
    if args.mode == "mc":
        grid = montecarlo.mc_response_grid(
            mask, args.M, constellation, k_set, l_set, nu_set,
            trials=args.trials, seed=args.seed, budget=budget)
        path = os.path.join(args.out, "response_mc.csv")
        write_csv(path, response.GRID_HEADER_MC, response.grid_rows(grid),
                  config, args.seed)
    else:
        report = montecarlo.validate_grid(
            mask, args.M, constellation, k_set, l_set, nu_set,
            trials=args.trials, seed=args.seed, budget=budget)
        path = os.path.join(args.out, "response_both.csv")
        rows = [(p.k, p.l, p.nu, p.mc_mean, p.mc_se, p.trials,
                 p.closed_form, p.z) for p in report.points]
        write_csv(path, montecarlo.VALIDATION_HEADER, rows, config, args.seed)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    mask_args = args.mask if isinstance(args.mask, list) else [args.mask]
    if args.command == "compare" and len(mask_args) < 2:
        raise ValueError("compare needs at least two --mask arguments")
    mu4 = _resolve_mu4(args)
    options = {
        "mask": mask_args,
        "M": args.M,
        "constellation": args.constellation,
        "mu4": args.mu4,
        "normalize": args.normalize,
        "out": args.out,
    }
    config = canonical_config(args.command, options)
    reports = []
    for text in mask_args:
        mask = mask_from_arg(text)
        row = metrics.metrics_report(mask, args.M, mu4, args.normalize)
        reports.append(row)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{args.command}.csv")
    write_csv(path, metrics.REPORT_HEADER,
              [metrics.report_row(r) for r in reports], config, 0)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    mu4 = _resolve_mu4(args)
    options = {"mask": args.mask, "constellation": args.constellation,
               "mu4": args.mu4, "out": args.out}
    config = canonical_config("bounds", options)
    mask = mask_from_arg(args.mask)
    b = metrics.doppler_sidelobe_sum(mask, mu4)
    print(f"mask: {mask.label}")
    print(f"I: {b.value:.11e}")
    print(f"I_lower: {b.lower:.11e}")
    print(f"I_upper: {b.upper:.11e}")
    print(f"attains_upper: {int(b.attains_upper())}")
    print(f"attains_lower: {int(b.attains_lower())}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "bounds.csv")
        write_csv(path,
                  ("mask_id", "I", "I_lower", "I_upper",
                   "attains_upper", "attains_lower"),
                  [(mask.label, b.value, b.lower, b.upper,
                    int(b.attains_upper()), int(b.attains_lower()))],
                  config, 0)
        print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------- selftest

def _selftest_items(trials: int, seed: int):
    rng = np.random.Generator(np.random.Philox(key=seed))

    def random_suite(count, lo=5, hi=64):
        out = []
        for _ in range(count):
            n = int(rng.integers(lo, hi + 1))
            w = int(rng.integers(1, n))
            out.append(masks.random_mask(n, w, int(rng.integers(0, 2 ** 31))))
        return out

    def field_tables():
        from . import gf2
        f = gf2.default_field(3)
        assert gf2.field_mul(0b010, gf2.field_pow(0b010, 3, f), f) == 0b110
        assert gf2.field_pow(0b010, 7, f) == 1
        assert gf2.trace(0, f) == 0 and gf2.trace(1, f) == 1
        for m in range(3, 9):
            fm = gf2.default_field(m)
            zeros = sum(1 for e in fm.elements() if gf2.trace(e, fm) == 0)
            assert zeros == 2 ** (m - 1), f"trace balance broken for m={m}"

    def singer_difference_counts():
        for m in range(3, 7):
            mask = masks.singer_mask(m)
            n, lam = mask.n, 2 ** (m - 2) - 1
            counts = {k: 0 for k in range(1, n)}
            for i in mask.support:
                for j in mask.support:
                    if i != j:
                        counts[(i - j) % n] += 1
            assert all(v == lam for v in counts.values()), f"m={m}"

    def autocorr_sums():
        suite = random_suite(40) + [masks.singer_mask(4), masks.comb_mask(12, 3)]
        for mask in suite:
            a = spectra.autocorr(mask)
            w = mask.weight
            assert int(a[0]) == w
            assert int(a.sum()) == w * w
            assert int(a[1:].sum()) == w * (w - 1)

    def range_sidelobe_sum():
        suite = [masks.singer_mask(m) for m in range(3, 7)]
        suite += [masks.comb_mask(63, 3)] + random_suite(20)
        for mask in suite:
            r = spectra.cross_term_matrix(mask)
            n, w = mask.n, mask.weight
            off = int(r[1:, 1:].sum() - np.trace(r[1:, 1:]))
            assert off == w * (n - w) * (w - 1), mask.label

    def parseval():
        suite = [masks.singer_mask(3), masks.singer_mask(6),
                 masks.comb_mask(6, 3), masks.comb_mask(63, 3)] + random_suite(10)
        for mask in suite:
            for k in range(1, mask.n):
                direct = sum(abs(spectra.s_kn(mask, k, nu)) ** 2
                             for nu in range(1, mask.n))
                assert abs(direct - spectra.doppler_energy_f(mask, k)) <= 1e-6

    def tiled_dft_sparsity():
        cases = [(masks.singer_mask(3), 4), (masks.comb_mask(6, 3), 5),
                 (masks.singer_mask(4), 8), (masks.random_mask(16, 5, 7), 8)]
        for mask, m_pri in cases:
            total = m_pri * mask.n
            assert total <= 2048
            for k in range(1, mask.n):
                tiled = np.tile(spectra.gamma(mask, k).values, m_pri)
                big = np.fft.fft(tiled)
                for nu in range(total):
                    if nu % m_pri:
                        assert abs(big[nu]) <= 1e-9 * total
                    else:
                        want = spectra.s_kmn(mask, k, m_pri, nu)
                        assert abs(big[nu] - want) <= 1e-9 * max(1.0, abs(want))

    def bound_bracketing():
        for mask in random_suite(60):
            b = metrics.doppler_sidelobe_sum(mask, 1.32)
            assert b.lower <= b.value + 1e-9 * max(1.0, abs(b.value))
            assert b.value <= b.upper + 1e-9 * max(1.0, abs(b.value))
        for m in range(3, 7):
            assert metrics.doppler_sidelobe_sum(
                masks.singer_mask(m), 1.32).attains_upper()
        for mask in (masks.comb_mask(6, 3), masks.comb_mask(63, 3)):
            b = metrics.doppler_sidelobe_sum(mask, 1.32)
            assert b.value == b.lower

    def double_sum_oracle():
        mask = masks.singer_mask(3)
        qam16 = montecarlo.make_constellation("qam16")
        params = response.ScenarioParams(mask=mask, M=4, mu4=qam16.mu4)
        for k in range(1, 7):
            for l in range(1, 7):
                for nu in (0, 1, 3, 4, 8, 27):
                    want = response.expected_response(params, k, l, nu)
                    got = montecarlo.expectation_by_double_sum(
                        mask, 4, qam16, k, l, nu)
                    assert abs(got - want) <= 1e-9 * max(1.0, abs(want))

    def mc_oracle():
        mask = masks.singer_mask(3)
        qam16 = montecarlo.make_constellation("qam16")
        triples = [(1, 1, 0), (1, 1, 2), (2, 5, 9), (3, 3, 4), (4, 2, 0), (6, 6, 12)]
        pts = montecarlo.mc_points(mask, 4, qam16, triples,
                                   trials=trials, seed=seed)
        bad = [p for p in pts if abs(p.z) > 4.0]
        assert not bad, f"{len(bad)} points beyond 4 standard errors"

    def determinism():
        mask = masks.singer_mask(3)
        qam16 = montecarlo.make_constellation("qam16")
        scen = montecarlo.EchoScenario(mask=mask, M=4, constellation=qam16,
                                       true_delay=2, true_doppler=0,
                                       trial_doppler=5)
        first = montecarlo.estimate(scen, 2, 200, seed)
        second = montecarlo.estimate(scen, 2, 200, seed)
        assert first == second

    return [
        ("field_tables", field_tables),
        ("singer_difference_counts", singer_difference_counts),
        ("autocorr_sum_identities", autocorr_sums),
        ("range_sidelobe_sum_identity", range_sidelobe_sum),
        ("parseval_identity", parseval),
        ("tiled_dft_sparsity", tiled_dft_sparsity),
        ("bound_bracketing", bound_bracketing),
        ("double_sum_oracle", double_sum_oracle),
        ("mc_oracle", mc_oracle),
        ("determinism", determinism),
    ]


def cmd_selftest(args) -> int:
    failures = 0
    started = time.perf_counter()
    for name, fn in _selftest_items(args.trials, args.seed):
        t0 = time.perf_counter()
        try:
            fn()
        except AssertionError as exc:
            failures += 1
            print(f"FAIL {name}: {exc}")
            continue
        print(f"PASS {name} ({time.perf_counter() - t0:.2f}s)")
    elapsed = time.perf_counter() - started
    if elapsed > args.time_budget:
        failures += 1
        print(f"FAIL time_budget: {elapsed:.1f}s > {args.time_budget:.1f}s")
    print(f"selftest: {'ok' if failures == 0 else f'{failures} failure(s)'}")
    return EXIT_OK if failures == 0 else EXIT_NUMERIC


# ---------------------------------------------------------------- parser

def build_parser():
    import argparse

    parser = argparse.ArgumentParser(
        prog="maskrd",
        description="Range-Doppler analysis of periodic binary transmission masks.",
        epilog="Index sets: comma-separated entries 'a', 'a..b' (inclusive) "
               "or 'a..b:s' (stride s), e.g. '1..62' or '0,5,10..20:5'.")
    parser.add_argument("--version", action="version",
                        version=f"maskrd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_mask = sub.add_parser("mask", help="generate, verify or show masks")
    p_mask.add_argument("action", choices=("gen", "verify", "show"))
    p_mask.add_argument("spec", help="family spec (singer:m=6, comb:N=63,d=3, "
                                     "random:N=63,w=31,seed=7) or mask file")
    p_mask.add_argument("--out", help="directory to write the mask file into")
    p_mask.set_defaults(func=cmd_mask)

    p_resp = sub.add_parser("response", help="expected response grids")
    p_resp.add_argument("mode", choices=("closed", "mc", "both"))
    p_resp.add_argument("--mask", required=True)
    p_resp.add_argument("--M", type=int, required=True,
                        help="periods per coherent window")
    p_resp.add_argument("--constellation", choices=montecarlo.CONSTELLATION_NAMES)
    p_resp.add_argument("--mu4", type=float,
                        help="symbol kurtosis for closed-form-only runs")
    p_resp.add_argument("--k", required=True, help="true delay index set")
    p_resp.add_argument("--l", help="trial delay index set (default: same as --k)")
    p_resp.add_argument("--nu", required=True, help="Doppler bin index set")
    p_resp.add_argument("--trials", type=int, default=10000)
    p_resp.add_argument("--seed", type=int, default=0)
    p_resp.add_argument("--out", default=".")
    p_resp.add_argument("--budget", type=int,
                        help=f"max points*trials*MN (or ${BUDGET_ENV})")
    p_resp.set_defaults(func=cmd_response)

    for name, needs_many in (("metrics", False), ("compare", True)):
        p = sub.add_parser(name, help="mask quality report (CSV)")
        p.add_argument("--mask", action="append", required=True,
                       help="repeatable" if needs_many else None)
        p.add_argument("--M", type=int, required=True)
        p.add_argument("--constellation", choices=montecarlo.CONSTELLATION_NAMES)
        p.add_argument("--mu4", type=float)
        p.add_argument("--normalize", choices=metrics.NORMALIZATIONS,
                       default="none", help="mean-Doppler-sidelobe scaling")
        p.add_argument("--out", default=".")
        p.set_defaults(func=cmd_metrics)

    p_bounds = sub.add_parser("bounds", help="Doppler sidelobe sum and bounds")
    p_bounds.add_argument("--mask", required=True)
    p_bounds.add_argument("--constellation", choices=montecarlo.CONSTELLATION_NAMES)
    p_bounds.add_argument("--mu4", type=float)
    p_bounds.add_argument("--out")
    p_bounds.set_defaults(func=cmd_bounds)

    p_self = sub.add_parser("selftest", help="run the embedded identity suite")
    p_self.add_argument("--trials", type=int, default=100000,
                        help="Monte Carlo trials for the oracle item")
    p_self.add_argument("--seed", type=int, default=1234)
    p_self.add_argument("--time-budget", type=float, default=120.0,
                        help="overall wall-clock budget in seconds")
    p_self.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, montecarlo.McBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
