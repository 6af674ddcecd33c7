"""Bridge acceptance: every bundled triple file exports to a bundle that
passes core validation with all token indices resolving."""

import contextlib

import pytest

from sensespace import extract_triple_vectors, fixtures, load_bundle, load_triples

from sensebridge import ExportJob, export_embeddings


@contextlib.contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"FAIL: {name}", flush=True)
        raise
    print(f"PASS: {name}", flush=True)


def test_exporter_validity_hash_encoder(tmp_path):
    with criterion("exporter validity: all bundled triples resolve (hash encoder)"):
        for word in fixtures.triple_words():
            out_bundle = tmp_path / f"{word}.semb"
            out_triples = tmp_path / f"{word}_triples.json"
            export_embeddings(
                ExportJob(
                    encoder="hash:64",
                    out_bundle=out_bundle,
                    triples_path=fixtures.triples_path(word),
                    out_triples=out_triples,
                )
            )
            bundle = load_bundle(out_bundle)  # core validator
            triples = load_triples(out_triples)
            assert len(triples) >= 2
            for t in triples:
                va, v1, v2 = extract_triple_vectors(bundle, t)
                assert va.shape == (64,)


def test_exporter_validity_clip_encoder(tmp_path, tiny_clip_dir):
    with criterion("exporter validity: all bundled triples resolve (clip encoder)"):
        pytest.importorskip("transformers")
        for word in fixtures.triple_words():
            out_bundle = tmp_path / f"{word}.semb"
            out_triples = tmp_path / f"{word}_triples.json"
            export_embeddings(
                ExportJob(
                    encoder=f"clip:{tiny_clip_dir}",
                    out_bundle=out_bundle,
                    triples_path=fixtures.triples_path(word),
                    out_triples=out_triples,
                )
            )
            bundle = load_bundle(out_bundle)
            for t in load_triples(out_triples):
                extract_triple_vectors(bundle, t)


def test_exported_fixture_fit_keeps_k_small(tmp_path):
    # end to end across both packages: the bat triples, exported, fit with
    # a small subspace dimension as seen in practice
    from sensespace import fit_senses

    out_bundle = tmp_path / "bat.semb"
    out_triples = tmp_path / "bat_triples.json"
    export_embeddings(
        ExportJob(
            encoder="hash:64",
            out_bundle=out_bundle,
            triples_path=fixtures.triples_path("bat"),
            out_triples=out_triples,
        )
    )
    d1, d2, report = fit_senses(load_bundle(out_bundle), load_triples(out_triples))
    assert report.sense1.k < 5 and report.sense2.k < 5
    assert d1.scale > 0 and d2.scale > 0
