"""Command line entry point: ``argconcept <subcommand> ...``."""

import argparse
import json
import logging
import sys
from fractions import Fraction

from . import pipeline
from .pipeline import ConfigError, PipelineConfig

logger = logging.getLogger("argconcept")


def _common(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--taxonomy", dest="taxonomy_path")
    p.add_argument("--coverage", dest="coverage_mode", choices=("direct", "transitive"))
    p.add_argument("--strict-taxonomy", dest="strict_taxonomy", action="store_const", const=True)
    p.add_argument("--output-dir", "-o", dest="output_dir")
    p.add_argument("--seed", type=int)
    p.add_argument("-v", "--verbose", action="count", default=0)


def _solve_opts(p):
    p.add_argument("--tau", type=Fraction)
    p.add_argument("-k", dest="k", type=int, action="append",
                   help="number of concepts; repeat for several lexicons")
    p.add_argument("--k-overrides", dest="k_overrides_path", help="verb<TAB>k file")
    p.add_argument("--mode", choices=("ac", "bl"))
    p.add_argument("--bl-types", dest="bl_types", action="store_const", const=True)
    p.add_argument("--candidate-cap", dest="candidate_cap", type=int)
    p.add_argument("--node-budget", dest="node_budget", type=int)
    p.add_argument("--relax-k", dest="relax_k", action="store_const", const=True)
    p.add_argument("--solver", choices=("bb", "bruteforce"))
    p.add_argument("--workers", type=int)


def _extract_opts(p):
    p.add_argument("--corpus", dest="corpus_paths", action="append",
                   help="corpus file or directory; repeatable")
    p.add_argument("--format", dest="corpus_format", choices=pipeline.FORMATS)
    p.add_argument("--max-window", dest="max_window", type=int)


def _weigh_opts(p):
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--marginals", choices=("role", "corpus"))


def _eval_opts(p):
    p.add_argument("--pairs", help="labelled pairs: verb role term label [source]")
    p.add_argument("--positives", help="positive pairs to turn into a swap test set")
    p.add_argument("--swap-fraction", dest="swap_fraction", type=float)
    p.add_argument("--overrides", help="verb role term label relabel file")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="argconcept",
        description="Infer low-overlap argument concepts for verbs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract argument records from a parsed corpus")
    _common(p)
    _extract_opts(p)

    p = sub.add_parser("weigh", help="compute argument quality from records")
    _common(p)
    _weigh_opts(p)
    p.add_argument("records")

    p = sub.add_parser("conceptualize", help="solve the k-clique problem per verb/role")
    _common(p)
    _solve_opts(p)
    p.add_argument("quality")
    p.add_argument("--records", help="records file (needed for bl mode counts)")

    p = sub.add_parser("identify", help="judge verb/role/term pairs against a lexicon")
    _common(p)
    p.add_argument("lexicon")
    p.add_argument("pairs")

    p = sub.add_parser("eval", help="argument identification accuracy")
    _common(p)
    _eval_opts(p)
    p.add_argument("lexicons", nargs="+")

    p = sub.add_parser("oracle-check", help="branch and bound vs brute force on random graphs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=10000)
    p.add_argument("--max-n", dest="max_n", type=int, default=15)
    p.add_argument("-v", "--verbose", action="count", default=0)

    p = sub.add_parser("run", help="extract, weigh, conceptualize (ac and bl) and eval")
    _common(p)
    _extract_opts(p)
    _weigh_opts(p)
    _solve_opts(p)
    _eval_opts(p)
    return parser


_NOT_CONFIG = {"command", "config", "verbose", "records", "quality", "lexicon", "pairs",
               "lexicons", "positives", "overrides", "instances", "max_n"}


def make_config(args):
    data = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
    for key, value in vars(args).items():
        if key in _NOT_CONFIG or value is None:
            continue
        data[key] = value
    return PipelineConfig.from_dict(data)


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "oracle-check":
            bad = pipeline.cmd_oracle_check(args.seed, args.instances, args.max_n)
            for line in bad[:20]:
                print(line)
            print(f"{args.instances - len(bad)}/{args.instances} instances agree")
            return 1 if bad else 0
        cfg = make_config(args)
        if args.command == "extract":
            out, res = pipeline.cmd_extract(cfg)
            print(f"{out}: {len(res.records)} records from {res.files_ok} file(s); "
                  f"{len(res.files_failed)} unreadable, {res.stats.malformed} malformed sentence(s)")
        elif args.command == "weigh":
            out, table = pipeline.cmd_weigh(cfg, args.records)
            print(f"{out}: {len(table)} scored arguments")
        elif args.command == "conceptualize":
            for out in pipeline.cmd_conceptualize(cfg, args.quality, args.records):
                print(out)
        elif args.command == "identify":
            print(pipeline.cmd_identify(cfg, args.lexicon, args.pairs))
        elif args.command == "eval":
            pairs = pipeline.build_eval_pairs(cfg, args.pairs, args.positives, args.overrides)
            reports = pipeline.cmd_eval(cfg, args.lexicons, pairs)
            _print_reports(reports)
        elif args.command == "run":
            res = pipeline.run_pipeline(cfg, args.positives, args.pairs, args.overrides)
            for path in [res["records"], res["quality"], *res["lexicons"]]:
                print(path)
            if res["reports"]:
                _print_reports(res["reports"])
    except (ConfigError, FileNotFoundError) as exc:
        logger.error("%s", exc)
        return 2
    except OSError as exc:
        logger.error("%s", exc)
        return 1
    return 0


def _print_reports(reports):
    for name in sorted(reports):
        r = reports[name]
        roles = " ".join(f"{role}={v['accuracy']:.3f}" for role, v in sorted(r["by_role"].items()))
        print(f"{name}: accuracy={r['accuracy']:.3f} ({r['correct']}/{r['total']}) {roles}")


if __name__ == "__main__":
    sys.exit(main())
