"""Acceptance gate: one check and one printed pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as
they are produced.  Every criterion states its tolerance explicitly; the
randomized suites use fixed seeds so a pass here is reproducible.
"""

import contextlib
import io
import itertools
import json
import math
import time

import numpy as np

from helpers import (
    PROVIDER_KINDS,
    engineered_product_family,
    families_equal,
    random_decomposition,
    random_family,
)
from qhistories import (
    ParseError,
    TrivialEvolution,
    embed,
    embed_family,
    family_decoherence_matrix,
    from_product,
    is_homogeneous,
    is_hpo_family,
    isham_counterexample,
    isham_histories,
    load_document,
    parse_family,
    serialize_family,
    sum_hpo,
    verify_intra_additivity,
    verify_product_additivity,
    weight,
    weight_table,
)
from qhistories.chain import decoherence_matrix
from qhistories.cli import main
from qhistories.demos import (
    P0,
    P1,
    P_MINUS,
    P_PLUS,
    branch_no_prod_family,
    fig2_family,
    isham_reversed_family,
)


def _report(num: int, label: str, ok: bool) -> bool:
    print(f"acceptance {num:02d} {label}: {'PASS' if ok else 'FAIL'}")
    return ok


def _run_cli(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def _weights_from_demo(out: str):
    line = next(l for l in out.splitlines() if l.startswith("weights: "))
    return [float(v) for v in line.split()[1:]]


# Criterion 3 builds 200 families that criteria 5 and 7 reuse.
_FAMILY_CACHE: list = []


def _randomized_families():
    if not _FAMILY_CACHE:
        rng = np.random.default_rng(20260814)
        for i in range(200):
            _FAMILY_CACHE.append(
                random_family(rng, kind=PROVIDER_KINDS[i % len(PROVIDER_KINDS)]))
    return _FAMILY_CACHE


def test_acceptance_01_counterexample_weights():
    start = time.perf_counter()
    code, out = _run_cli(["demo", "isham-hpo"])
    elapsed = time.perf_counter() - start
    values = _weights_from_demo(out)
    ok = (
        code == 0
        and len(values) == 4
        and all(abs(v - e) <= 1e-12
                for v, e in zip(values, (0.25, 0.25, 1.0, 0.0)))
        and abs(sum(values) - 1.5) <= 1e-12
        and "sum = 1.5; NOT a branching family" in out
        and elapsed < 1.0
    )
    assert _report(1, "hpo demo weights (1/4, 1/4, 1, 0), sum 3/2, within 1e-12", ok)


def test_acceptance_02_reversed_family_weights():
    start = time.perf_counter()
    code, out = _run_cli(["demo", "isham-reversed"])
    elapsed = time.perf_counter() - start
    values = _weights_from_demo(out)
    ok = (
        code == 0
        and len(values) == 4
        and abs(sum(values) - 1.0) <= 1e-12
        and abs(values[2] - 1.0) <= 1e-12
        and all(abs(values[i]) <= 1e-12 for i in (0, 1, 3))
        and elapsed < 1.0
    )
    assert _report(2, "reversed demo weight sum 1.0 within 1e-12, "
                      "only one nonzero", ok)


def test_acceptance_03_weight_sums_randomized():
    start = time.perf_counter()
    families = _randomized_families()
    worst = 0.0
    for fam in families:
        assert fam.validate().ok
        total = math.fsum(weight_table(fam))
        worst = max(worst, abs(total - 1.0))
    elapsed = time.perf_counter() - start
    ok = len(families) == 200 and worst <= 1e-9 and elapsed < 30.0
    assert _report(3, "weights sum to 1 within 1e-9 on 200 randomized "
                      f"families (worst {worst:.3g})", ok)


def test_acceptance_04_extension_splits_weight():
    rng = np.random.default_rng(40404)
    worst = 0.0
    checked = 0
    while checked < 100:
        kind = PROVIDER_KINDS[checked % len(PROVIDER_KINDS)]
        fam = random_family(rng, max_depth=3, kind=kind)
        leaves = fam.leaves()
        leaf = leaves[int(rng.integers(len(leaves)))]
        parts = int(rng.integers(2, fam.dim + 1))
        decomposition = random_decomposition(fam.dim, parts, rng)
        child_times = [leaf.time + 0.5] * parts
        old = weight(fam.history_of_leaf(leaf.id), fam.evolution,
                     fam.initial_state)
        extended = fam.extend(leaf.id, decomposition, child_times)
        children = extended.children_of(leaf.id)
        new = math.fsum(
            weight(extended.history_of_leaf(c.id), extended.evolution,
                   extended.initial_state)
            for c in children)
        worst = max(worst, abs(old - new))
        checked += 1
    ok = worst <= 1e-9
    assert _report(4, "100 random extensions: W(leaf) = sum of child "
                      f"weights within 1e-9 (worst {worst:.3g})", ok)


def test_acceptance_05_sibling_additivity():
    families = _randomized_families()
    worst_ok = True
    pairs = 0
    for fam in families:
        by_parent: dict = {}
        for leaf in fam.leaves():
            by_parent.setdefault(leaf.parent, []).append(leaf.id)
        for siblings in by_parent.values():
            for a, b in itertools.combinations(siblings, 2):
                pairs += 1
                if not verify_intra_additivity(fam, a, b, 1e-9):
                    worst_ok = False
    ok = worst_ok and pairs > 100
    assert _report(5, "intra-branch additivity within 1e-9 on all "
                      f"{pairs} sibling pairs of the 200 families", ok)


def test_acceptance_06_product_families_and_counterexample():
    rng = np.random.default_rng(60606)
    ok = True
    for dim, sizes in ((2, (2, 2)), (3, (2, 3, 2)), (4, (3, 2, 2)), (2, (2,))):
        decomps = [random_decomposition(dim, n, rng) for n in sizes]
        times = [float(k) for k in range(len(sizes))]
        fam = from_product(dim, times, decomps)
        ok = ok and len(fam.histories()) == math.prod(sizes)
        ok = ok and fam.validate().ok
        ok = ok and fam.is_product_shaped()
    bnp = branch_no_prod_family()
    ok = ok and bnp.validate().ok and not bnp.is_product_shaped()
    assert _report(6, "from_product yields prod(sizes) histories and "
                      "validates; branch-no-prod validates but is not "
                      "product shaped", ok)


def test_acceptance_07_decoherence_contracts():
    families = [f for f in _randomized_families() if len(f.leaves()) <= 64]
    families = families[:40]
    worst_herm = 0.0
    worst_diag = 0.0
    for fam in families:
        d = family_decoherence_matrix(fam)
        worst_herm = max(worst_herm, float(np.max(np.abs(d - d.conj().T))))
        worst_diag = max(worst_diag, float(np.max(np.abs(
            np.real(np.diag(d)) - np.asarray(weight_table(fam))))))
    d_isham = decoherence_matrix(isham_histories(), TrivialEvolution(2), P0)
    offdiag_ok = abs(d_isham[0, 1] - (-0.25)) <= 1e-9
    ok = (len(families) == 40 and worst_herm <= 1e-12
          and worst_diag <= 1e-12 and offdiag_ok)
    assert _report(7, "D Hermitian and diagonal = weights within 1e-12 "
                      "on 40 families; counterexample D_12 = -1/4 within "
                      "1e-9", ok)


def test_acceptance_08_additivity_matches_decoherence():
    rng = np.random.default_rng(80808)
    worst = 0.0
    interfering = 0
    pairs = 0
    for _ in range(50):
        fam = engineered_product_family(rng)
        histories = fam.histories()
        d = family_decoherence_matrix(fam)
        evolution, rho = fam.evolution, fam.initial_state
        for a, b in itertools.combinations(range(len(histories)), 2):
            ha, hb = histories[a], histories[b]
            differing = [
                k for k in range(len(ha))
                if np.max(np.abs(ha.projectors[k] - hb.projectors[k])) > 1e-9
            ]
            if len(differing) != 1:
                continue
            pairs += 1
            _, discrepancy = verify_product_additivity(ha, hb, evolution, rho)
            expected = 2.0 * float(d[a, b].real)
            worst = max(worst, abs(discrepancy - expected))
            if abs(discrepancy) > 1e-6:
                interfering += 1
    ok = pairs > 500 and interfering > 0 and worst <= 1e-9
    assert _report(8, f"W(sum)-W1-W2 = 2 Re D within 1e-9 on {pairs} "
                      f"summable pairs ({interfering} with genuine "
                      "interference)", ok)


def test_acceptance_09_hpo_algebra():
    ok = True

    # Embeddings of product families are valid history-projector families
    # whose total is the history-space identity, exactly for dyadic bases.
    for fam in (
        from_product(2, [0.0, 1.0], [[P0, P1], [P_PLUS, P_MINUS]]),
        from_product(2, [0.0, 1.0], [[P0, P1], [P0, P1]]),
        branch_no_prod_family(),
        isham_reversed_family(),
    ):
        embedded = embed_family(fam)
        ok = ok and is_hpo_family(embedded)
        total = sum_hpo(embedded, [1] * len(embedded))
        ok = ok and np.array_equal(total.matrix, np.eye(total.dim))

    family, _ = isham_counterexample()
    ok = ok and is_hpo_family(family)
    ok = ok and np.array_equal(
        sum_hpo(family, [1, 1, 1, 1]).matrix, np.eye(4))

    # The three documented homogeneity cases.
    ok = ok and all(is_homogeneous(embed(h)) for h in isham_histories())
    ok = ok and not is_homogeneous(sum_hpo(family, [1, 0, 1, 0]))
    collapsed = sum_hpo(family, [1, 1, 0, 0])
    ok = ok and is_homogeneous(collapsed)
    ok = ok and np.array_equal(collapsed.matrix, np.kron(np.eye(2), P1))

    assert _report(9, "embeddings form valid HPO families, all-ones sum "
                      "is the identity exactly, homogeneity classifies "
                      "the three sum cases", ok)


def _corrupted_documents():
    base = serialize_family(fig2_family()).decode("utf-8")

    def mutate(**changes):
        copy = json.loads(base)
        copy.update(changes)
        return json.dumps(copy)

    def mutate_node(index, **changes):
        copy = json.loads(base)
        copy["nodes"][index].update(changes)
        return json.dumps(copy)

    del_nodes = json.loads(base)
    del del_nodes["nodes"][3]["projector"]
    dup = json.loads(base)
    dup["nodes"][2]["id"] = dup["nodes"][1]["id"]

    return [
        base[: len(base) // 2],                    # truncated mid-document
        base[:-1],                                  # missing final brace
        "",                                         # empty input
        "null",                                     # not an object
        "[1, 2, 3]",                                # not an object
        base + "}",                                 # trailing data
        base.replace('"nodes":[', '"nodes":[,', 1),  # stray comma
        base.encode("utf-8")[:40] + b"\xfe\xff" + base.encode("utf-8")[40:],
        mutate(extra_key=1),                        # unknown top-level key
        '{"dim": 2}',                               # missing sections
        mutate(dim="three"),                        # wrong type
        mutate(dim=0),                              # non-positive dimension
        mutate(dim=True),                           # boolean is not an int
        mutate(initial_state="thermal"),            # unknown state literal
        mutate(initial_state=[[[1, 0]]]),           # wrong matrix shape
        mutate(dynamics={"kind": "magic"}),         # unknown dynamics kind
        base.replace('"time":0}', '"time":NaN}', 1),  # non-finite number
        mutate_node(0, projector=[[[1, 0], [0, 0], [0, 0]]] * 3),  # root
        json.dumps(del_nodes),                      # child without projector
        json.dumps(dup),                            # duplicate node id
    ]


def test_acceptance_10_round_trip_and_parse_errors():
    rng = np.random.default_rng(101010)
    round_trips = 0
    ok = True
    for i in range(100):
        fam = random_family(rng, kind=PROVIDER_KINDS[i % len(PROVIDER_KINDS)])
        blob = serialize_family(fam)
        back = parse_family(blob)
        ok = ok and families_equal(fam, back)
        ok = ok and serialize_family(back) == blob
        round_trips += 1

    corrupted = _corrupted_documents()
    positioned = 0
    for text in corrupted:
        try:
            load_document(text)
        except ParseError as exc:
            if exc.line is not None or exc.field is not None:
                positioned += 1
        except Exception:
            pass  # any other exception counts as a crash: not positioned
        else:
            pass  # parsing succeeded: the corruption was not detected

    ok = ok and round_trips == 100 and positioned == len(corrupted) == 20
    assert _report(10, "100 canonical round trips byte-identical; 20 "
                       "corrupted documents all fail with positioned "
                       "errors", ok)
