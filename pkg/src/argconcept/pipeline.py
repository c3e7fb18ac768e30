"""Pipeline configuration, artifact headers and the batch steps behind the CLI."""

import csv
import dataclasses
import hashlib
import io
import json
import logging
import os
import random
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import evaluation, extraction, solver, weighting
from .taxonomy import file_sha256, load_taxonomy

logger = logging.getLogger(__name__)

FORMATS = ("conllu", "arcs")


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    taxonomy_path: str = None
    coverage_mode: str = "direct"
    strict_taxonomy: bool = False
    corpus_paths: list = field(default_factory=list)
    corpus_format: str = "conllu"
    tau: Fraction = Fraction(1, 5)
    k: list = field(default_factory=lambda: [5, 10, 15])
    k_overrides_path: str = None
    mode: str = "ac"
    bl_types: bool = False
    marginals: str = "role"
    min_count: int = 2
    max_window: int = 4
    candidate_cap: int = 500
    node_budget: int = None
    relax_k: bool = False
    solver: str = "bb"
    seed: int = 0
    swap_fraction: float = 0.5
    workers: int = 1
    output_dir: str = "."

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.tau = Fraction(str(cfg.tau))
        cfg.k = [int(x) for x in (cfg.k if isinstance(cfg.k, (list, tuple)) else [cfg.k])]
        return cfg

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def validate(self, need=()):
        if not 0 < self.tau <= 1:
            raise ConfigError("tau must lie in (0, 1]")
        if not self.k or any(k < 1 for k in self.k):
            raise ConfigError("every k must be >= 1")
        if self.mode not in weighting.WEIGHT_MODES:
            raise ConfigError(f"mode must be one of {weighting.WEIGHT_MODES}")
        if self.corpus_format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.marginals not in weighting.MARGINAL_SCOPES:
            raise ConfigError(f"marginals must be one of {weighting.MARGINAL_SCOPES}")
        if self.solver not in ("bb", "bruteforce"):
            raise ConfigError("solver must be bb or bruteforce")
        if self.min_count < 1 or self.max_window < 1 or self.workers < 1:
            raise ConfigError("min_count, max_window and workers must be >= 1")
        if not 0 <= self.swap_fraction <= 1:
            raise ConfigError("swap_fraction must lie in [0, 1]")
        for name in need:
            value = getattr(self, name)
            if not value:
                raise ConfigError(f"{name} is required")
            for p in value if isinstance(value, list) else [value]:
                if not os.path.exists(p):
                    raise ConfigError(f"{name}: no such path {p}")
        if self.k_overrides_path and not os.path.exists(self.k_overrides_path):
            raise ConfigError(f"k_overrides_path: no such file {self.k_overrides_path}")
        return self


def config_hash(params):
    blob = json.dumps(params, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def taxonomy_id(tax):
    return f"{tax.source_hash[:16]}:{tax.coverage_mode}"


def _tsv_header(step, params):
    return [f"step: {step}",
            "config: " + json.dumps(params, sort_keys=True, separators=(",", ":")),
            f"config_hash: {config_hash(params)}"]


def read_header(path):
    """Return the ``key: value`` pairs from a file's leading comment block."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if first.startswith("{"):
            head = json.loads(first)
            return head if head.get("type") == "header" else {}
        line = first
        while line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            out[key] = value
            line = fh.readline()
    return out


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_tax(cfg):
    return load_taxonomy(cfg.taxonomy_path, cfg.coverage_mode, strict=cfg.strict_taxonomy)


def _corpus_files(paths):
    files = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            found = sorted(f for f in p.rglob("*") if f.is_file())
            if not found:
                logger.warning("corpus directory %s is empty", p)
            files.extend(found)
        else:
            files.append(p)
    return files


@dataclass
class ExtractResult:
    records: list
    files_ok: int = 0
    files_failed: list = field(default_factory=list)
    stats: extraction.ExtractionStats = field(default_factory=extraction.ExtractionStats)


def extract_corpus(cfg, tax):
    """Run extraction over every corpus file, isolating per-file failures."""
    econf = extraction.ExtractionConfig(max_window=cfg.max_window)
    result = ExtractResult([])
    parts = []
    for f in _corpus_files(cfg.corpus_paths):
        stats = extraction.ExtractionStats()
        try:
            with open(f, encoding="utf-8") as fh:
                lines = fh.readlines()
            if cfg.corpus_format == "conllu":
                sents = list(extraction.read_conllu(lines, stats, source=f.name))
                recs = extraction.extract_instances(sents, tax, econf, stats)
            else:
                recs = extraction.read_arcs(lines, econf, stats, source=f.name)
        except (OSError, UnicodeDecodeError) as exc:
            logger.error("cannot read corpus file %s: %s", f, exc)
            result.files_failed.append(str(f))
            continue
        result.files_ok += 1
        parts.append(recs)
        for name in ("sentences", "malformed", "instances"):
            setattr(result.stats, name, getattr(result.stats, name) + getattr(stats, name))
    result.records = extraction.merge_records(*parts)
    return result


def cmd_extract(cfg):
    cfg.validate(need=("taxonomy_path",))
    tax = _load_tax(cfg)
    res = extract_corpus(cfg, tax)
    if res.files_failed and not res.files_ok:
        raise OSError(f"all {len(res.files_failed)} corpus files failed")
    if res.files_failed or res.stats.malformed:
        logger.warning("extract: %d file(s) unreadable, %d malformed sentence(s)",
                       len(res.files_failed), res.stats.malformed)
    params = {
        "taxonomy": taxonomy_id(tax),
        "corpus": sorted(file_sha256(f)[:16] for f in _corpus_files(cfg.corpus_paths)
                         if str(f) not in res.files_failed),
        "format": cfg.corpus_format,
        "max_window": cfg.max_window,
    }
    buf = io.StringIO()
    extraction.write_records(buf, res.records, _tsv_header("extract", params))
    out = Path(cfg.output_dir) / "records.tsv"
    atomic_write(out, buf.getvalue())
    return out, res


def cmd_weigh(cfg, records_path):
    cfg.validate()
    with open(records_path, encoding="utf-8") as fh:
        records = extraction.read_records(fh)
    table = weighting.compute_quality(records, cfg.min_count, cfg.marginals)
    params = {
        "records": file_sha256(records_path)[:16],
        "min_count": cfg.min_count,
        "marginals": cfg.marginals,
        "log_base": 2,
    }
    buf = io.StringIO()
    weighting.write_quality_table(buf, table, _tsv_header("weigh", params))
    out = Path(cfg.output_dir) / "quality.tsv"
    atomic_write(out, buf.getvalue())
    return out, table


def read_k_overrides(path):
    out = {}
    if not path:
        return out
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip() or line.startswith("#"):
                continue
            try:
                verb, k = line.rstrip("\r\n").split("\t")
                out[verb.strip().lower()] = int(k)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: expected verb<TAB>k") from None
    return out


def _solve_task(args):
    graph, k, method, node_budget, relax = args
    while k >= 1:
        if method == "bruteforce":
            sol = solver.solve_bruteforce(graph, k)
        else:
            sol = solver.solve_bb(graph, k, node_budget)
        if sol is not None or not relax:
            return k, sol
        k -= 1
    return k, None


def _fmt_tau(tau):
    return f"{tau.numerator}/{tau.denominator}"


def conceptualize(cfg, tax, table, k):
    """Solve every (verb, role) in ``table`` for one k; returns lexicon entries."""
    overrides = read_k_overrides(cfg.k_overrides_path)
    tasks = []
    for (verb, role), entries in sorted(table.by_verb_role().items()):
        graph = solver.build_concept_graph(tax, entries, verb, role, cfg.tau, cfg.mode,
                                           cfg.candidate_cap, cfg.bl_types)
        tasks.append((graph, overrides.get(verb, k), cfg.solver, cfg.node_budget, cfg.relax_k))
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_solve_task, tasks, chunksize=4))
    else:
        results = [_solve_task(t) for t in tasks]
    entries = []
    for (graph, k_req, *_), (k_used, sol) in zip(tasks, results):
        entry = {
            "verb": graph.verb,
            "role": graph.role,
            "k": k_req,
            "tau": _fmt_tau(graph.tau),
            "mode": cfg.mode,
            "candidates": len(graph),
        }
        if sol is None:
            entry.update(solution=False, concepts=[], score=None, optimal=True,
                         explored_nodes=0)
        else:
            if k_used != k_req:
                entry["k_used"] = k_used
            entry.update(
                solution=True,
                concepts=[{"concept": tax.surface(graph.concepts[i]),
                           "weight": graph.weights[i],
                           "coverage": len(tax.covered_entities(graph.concepts[i])),
                           "covered_args": graph.covered[i]}
                          for i in sol.indices],
                score=sol.score,
                optimal=sol.optimal,
                explored_nodes=sol.explored_nodes,
            )
        entries.append(entry)
    return entries


def lexicon_params(cfg, tax, quality_path, k):
    params = {
        "taxonomy": taxonomy_id(tax),
        "quality": file_sha256(quality_path)[:16],
        "tau": _fmt_tau(cfg.tau),
        "k": k,
        "mode": cfg.mode,
        "bl_types": cfg.bl_types,
        "candidate_cap": cfg.candidate_cap,
        "node_budget": cfg.node_budget,
        "relax_k": cfg.relax_k,
    }
    if cfg.k_overrides_path:
        params["k_overrides"] = file_sha256(cfg.k_overrides_path)[:16]
    return params


# Search effort differs between the two solver paths, so it lives in a sidecar
# file; the lexicon itself is identical whichever exact solver produced it.
SOLVER_ONLY_FIELDS = ("explored_nodes",)


def write_lexicon(path, params, entries):
    header = {"type": "header", "config": params, "config_hash": config_hash(params),
              "taxonomy": params["taxonomy"]}
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps({k: v for k, v in e.items() if k not in SOLVER_ONLY_FIELDS},
                         sort_keys=True) for e in entries]
    atomic_write(path, "\n".join(lines) + "\n")


def write_solve_stats(path, solver_name, entries):
    rows = ["verb\trole\tsolver\tcandidates\texplored_nodes\toptimal"]
    for e in entries:
        rows.append(f"{e['verb']}\t{e['role']}\t{solver_name}\t{e['candidates']}\t"
                    f"{e.get('explored_nodes', 0)}\t{str(e['optimal']).lower()}")
    atomic_write(path, "\n".join(rows) + "\n")


def read_lexicon(path):
    """Return ``(header, {(verb, role): [concept, ...]}, entries)``."""
    with open(path, encoding="utf-8") as fh:
        rows = [json.loads(l) for l in fh if l.strip()]
    if not rows or rows[0].get("type") != "header":
        raise ValueError(f"{path}: missing lexicon header")
    header, entries = rows[0], rows[1:]
    lex = {(e["verb"], e["role"]): [c["concept"] for c in e["concepts"]] for e in entries}
    return header, lex, entries


def _counts_from_records(path):
    with open(path, encoding="utf-8") as fh:
        return {r.key: r.count for r in extraction.read_records(fh)}


def cmd_conceptualize(cfg, quality_path, records_path=None):
    cfg.validate(need=("taxonomy_path",))
    if cfg.mode == "bl" and not cfg.bl_types and not records_path:
        raise ConfigError("bl mode needs the records file for occurrence counts")
    tax = _load_tax(cfg)
    counts = _counts_from_records(records_path) if records_path else None
    with open(quality_path, encoding="utf-8") as fh:
        table = weighting.read_quality_table(fh, counts)
    outputs = []
    for k in cfg.k:
        entries = conceptualize(cfg, tax, table, k)
        out = Path(cfg.output_dir) / f"lexicon_{cfg.mode}_k{k}.jsonl"
        write_lexicon(out, lexicon_params(cfg, tax, quality_path, k), entries)
        write_solve_stats(out.with_name(f"solve_stats_{cfg.mode}_k{k}.tsv"), cfg.solver, entries)
        missing = sum(1 for e in entries if not e["solution"])
        if missing:
            logger.warning("k=%d: %d verb/role slot(s) without a %d-clique", k, missing, k)
        outputs.append(out)
    return outputs


def _check_lexicon_taxonomy(header, tax, path):
    if header.get("taxonomy") != taxonomy_id(tax):
        raise ConfigError(f"{path}: lexicon built from taxonomy {header.get('taxonomy')}, "
                          f"loaded taxonomy is {taxonomy_id(tax)}")


def cmd_identify(cfg, lexicon_path, pairs_path):
    cfg.validate(need=("taxonomy_path",))
    tax = _load_tax(cfg)
    header, lex, _ = read_lexicon(lexicon_path)
    _check_lexicon_taxonomy(header, tax, lexicon_path)
    with open(pairs_path, encoding="utf-8") as fh:
        pairs = evaluation.read_pairs(fh)
    lines = []
    for p in pairs:
        pred = evaluation.identify(lex, tax, p)
        lines.append(f"{p.verb}\t{p.role}\t{p.term}\t{pred.label}\t{pred.concept or ''}\t{pred.reason}")
    out = Path(cfg.output_dir) / "predictions.tsv"
    atomic_write(out, "".join(l + "\n" for l in lines))
    return out


def build_eval_pairs(cfg, pairs_path=None, positives_path=None, overrides_path=None):
    if pairs_path:
        with open(pairs_path, encoding="utf-8") as fh:
            pairs = evaluation.read_pairs(fh)
    elif positives_path:
        with open(positives_path, encoding="utf-8") as fh:
            positives = evaluation.read_pairs(fh)
        pairs = evaluation.generate_swaps(positives, cfg.seed, cfg.swap_fraction)
    else:
        raise ConfigError("eval needs --pairs or --positives")
    if overrides_path:
        with open(overrides_path, encoding="utf-8") as fh:
            pairs = evaluation.apply_overrides(pairs, evaluation.read_overrides(fh))
    return pairs


def cmd_eval(cfg, lexicon_paths, pairs):
    cfg.validate(need=("taxonomy_path",))
    tax = _load_tax(cfg)
    reports = {}
    for path in lexicon_paths:
        header, lex, _ = read_lexicon(path)
        _check_lexicon_taxonomy(header, tax, path)
        conf = header["config"]
        label = f"{conf['mode']}_k{conf['k']}"
        preds = [evaluation.identify(lex, tax, p) for p in pairs]
        reports[label] = evaluation.score(preds, pairs, mode=conf["mode"])
    outdir = Path(cfg.output_dir)
    buf = io.StringIO()
    evaluation.write_pairs(buf, pairs)
    atomic_write(outdir / "eval_pairs.tsv", buf.getvalue())
    summary = {name: {k: v for k, v in r.items() if k != "errors"} for name, r in reports.items()}
    atomic_write(outdir / "eval_report.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lexicon", "verb", "role", "term", "gold", "predicted", "source_id"])
    for name in sorted(reports):
        for e in reports[name]["errors"]:
            writer.writerow([name, e["verb"], e["role"], e["term"], e["gold"],
                             e["predicted"], e["source_id"]])
    atomic_write(outdir / "eval_errors.csv", buf.getvalue())
    return reports


def cmd_oracle_check(seed, instances, max_n=15):
    rng = random.Random(seed)
    return solver.oracle_check(rng, instances, max_n)


def run_pipeline(cfg, positives_path=None, pairs_path=None, overrides_path=None):
    """extract -> weigh -> conceptualize (ac and bl) -> eval."""
    out = Path(cfg.output_dir)
    records_path, _ = cmd_extract(cfg)
    quality_path, _ = cmd_weigh(cfg, records_path)
    lexicons = []
    for mode in ("ac", "bl"):
        mcfg = dataclasses.replace(cfg, mode=mode)
        lexicons += cmd_conceptualize(mcfg, quality_path, records_path)
    reports = None
    if positives_path or pairs_path:
        pairs = build_eval_pairs(cfg, pairs_path, positives_path, overrides_path)
        reports = cmd_eval(cfg, lexicons, pairs)
    return {"records": records_path, "quality": quality_path, "lexicons": lexicons,
            "reports": reports, "output_dir": out}
