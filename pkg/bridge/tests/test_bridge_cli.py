"""Bridge CLI: export happy path and failure exit codes."""

import json

from sensespace import fixtures, load_bundle

from sensebridge import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_export_prompts(tmp_path, capsys):
    out = tmp_path / "b.semb"
    code, stdout, stderr = run(
        capsys, "export", "--encoder", "hash:16",
        "--prompt", "a bat", "--prompt", "a seal", "--out", str(out),
    )
    assert code == 0, stderr
    payload = json.loads(stdout)
    assert payload["prompts"] == 2 and payload["dim"] == 16
    assert load_bundle(out).encoder_tag.startswith("hash:16|layer=final_hidden")


def test_export_triples(tmp_path, capsys):
    out = tmp_path / "b.semb"
    out_triples = tmp_path / "t.json"
    code, stdout, stderr = run(
        capsys, "export", "--encoder", "hash:32",
        "--triples", str(fixtures.triples_path("seal")),
        "--out", str(out), "--out-triples", str(out_triples),
    )
    assert code == 0, stderr
    assert out_triples.exists()


def test_export_unavailable_encoder_exits_2(tmp_path, capsys):
    code, stdout, stderr = run(
        capsys, "export", "--encoder", "clip:openai/clip-vit-base-patch32",
        "--prompt", "a bat", "--out", str(tmp_path / "b.semb"),
    )
    assert code == 2
    assert json.loads(stderr)["error"] == "EncoderUnavailable"


def test_generate_without_diffusion_stack_exits_2(tmp_path, capsys):
    out = tmp_path / "b.semb"
    assert run(capsys, "export", "--encoder", "hash:16", "--prompt", "a bat",
               "--out", str(out))[0] == 0
    code, stdout, stderr = run(
        capsys, "generate", "--bundle", str(out), "--out-dir", str(tmp_path / "imgs"),
        "--prompt-index", "0",
    )
    assert code == 2
    assert json.loads(stderr)["error"] in ("ResourceUnavailable", "ShapeMismatch")
