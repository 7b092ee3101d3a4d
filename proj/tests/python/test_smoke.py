import numpy as np
import pytest

import sedsep


def sine(freq, n=16000, amp=0.3, sr=16000):
    t = np.arange(n) / sr
    return amp * np.sin(2 * np.pi * freq * t)


def test_stft_round_trip():
    x = np.random.default_rng(0).uniform(-0.5, 0.5, 5000)
    spec = sedsep.stft(x)
    assert spec.shape == (1 + 5000 // 128, 257)
    y = sedsep.istft(spec, len(x))
    assert np.max(np.abs(y - x)) < 1e-9


def test_oracle_separation_and_metrics():
    a, b = sine(250.0), sine(5000.0)
    mix = a + b
    est = sedsep.oracle_separate(np.stack([a, b]), mix, mask="irm")
    assert est.shape == (2, len(mix))
    assert np.max(np.abs(est.sum(axis=0) - mix)) < 1e-9
    assert sedsep.si_snr_improvement(est[0], a, mix) > 15.0
    assert sedsep.si_snr(a, a) == pytest.approx(80.0)
    assert sedsep.loss_active(a, a) == pytest.approx(-30.0)
    assert sedsep.loss_inactive(np.zeros_like(a), mix) == pytest.approx(-20.0)


def test_pit():
    assignment, total = sedsep.pit_assign([[5.0, 1.0], [1.0, 5.0]], [[0, 1]])
    assert assignment == [1, 0]
    assert total == 2.0


def test_fusion_fixtures():
    src = [np.array([[v]]) for v in (0.9, 0.1, 0.0, 0.0)]
    assert sedsep.combine_sources(src, 2.0)[0, 0] == pytest.approx(0.45277, abs=1e-5)
    assert sedsep.combine_sources(src, "max")[0, 0] == 0.9
    y = sedsep.combine_with_mixture(np.array([[0.8]]), np.array([[0.4]]), 2.0)
    assert y[0, 0] == pytest.approx(0.63246, abs=1e-5)


def test_detection_and_scoring():
    classes = ["Dog", "Cat"]
    truth = [(1.0, 2.5, "Dog"), (3.3, 7.0, "Cat")]
    scores = sedsep.oracle_posteriors(truth, classes, score=1.0)
    events = sedsep.decode_events(scores, classes, threshold=0.5)
    assert sorted(e[2] for e in events) == ["Cat", "Dog"]
    macro, per_class = sedsep.collar_f1({"c": events}, {"c": truth}, classes)
    assert macro == 1.0
    assert per_class["Dog"]["tp"] == 1


def test_generate_and_errors(tmp_path):
    clip = sedsep.generate_clip("BgFgFm", seed=3, index=1, duration=2.0)
    assert clip["clip_id"] == "clip_3_1"
    assert clip["references"].shape == (3, 32000)
    assert np.allclose(clip["references"].sum(axis=0), clip["mixture"])
    with pytest.raises(sedsep.SedsepError, match="BadScheme"):
        sedsep.generate_clip("Nope")
    path = str(tmp_path / "m.wav")
    sedsep.write_wav(path, clip["mixture"], float32=True)
    x, sr = sedsep.read_wav(path)
    assert sr == 16000 and len(x) == 32000


def test_cli(tmp_path):
    code, out, err = sedsep.run_cli(["mix", "--clips", "2", "--duration", "1", "--out", str(tmp_path / "ds")])
    assert code == 0, err
    assert (tmp_path / "ds" / "manifest.json").exists()
    code, _, err = sedsep.run_cli(["mix", "--scheme", "Nope"])
    assert code != 0 and err.startswith("error[BadScheme]")
