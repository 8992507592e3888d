from __future__ import annotations

import json

import numpy as np
import pytest

from earmetrics import AudioBuffer, save_wav
from earmetrics.cli import main
from helpers import noise_stereo


@pytest.fixture
def wav_pair(tmp_path):
    ref = noise_stereo(seconds=1.0, amp=0.4, seed=90)
    rec = AudioBuffer(ref.samples * 0.9, 44100)
    ref_path, rec_path = tmp_path / "ref.wav", tmp_path / "rec.wav"
    save_wav(ref_path, ref, sample_format="float32")
    save_wav(rec_path, rec, sample_format="float32")
    return str(ref_path), str(rec_path)


class TestEvalCommand:
    def test_json_report(self, wav_pair, capsys):
        assert main(["eval", *wav_pair]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["reference"] == wav_pair[0]
        assert set(doc) >= {"mel_dist", "stft_dist", "icpc_percent", "ccpc_percent", "si_sdr_db", "dbtp_dist"}
        # 0.9x scaling: scale-invariant metrics stay perfect, peak moves ~0.92 dB
        assert doc["si_sdr_db"] == 100.0
        assert doc["dbtp_dist"] == pytest.approx(0.92, abs=0.02)

    def test_csv_report(self, wav_pair, capsys):
        assert main(["eval", *wav_pair, "--format", "csv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("mel_dist,stft_dist,")
        assert len(lines[1].split(",")) == len(lines[0].split(","))

    def test_fft_sizes_override(self, wav_pair, capsys):
        assert main(["eval", *wav_pair, "--fft-sizes", "512", "256"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["config"]["fft_sizes"] == [512, 256]

    def test_objective_line(self, wav_pair, capsys):
        assert main(["eval", *wav_pair, "--objective", "--prefilter", "k"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 2
        breakdown = json.loads(lines[1])
        assert breakdown["prefilter"] == "k"
        assert breakdown["weighted_total"] == pytest.approx(
            50 * breakdown["stft_mag"] + 10 * breakdown["corr"] + 10 * breakdown["phase"],
            rel=1e-12,
        )

    def test_chunked(self, tmp_path, capsys):
        ref = noise_stereo(seconds=3.0, amp=0.4, seed=91)
        p = tmp_path / "long.wav"
        save_wav(p, ref, sample_format="float32")
        assert main(["eval", str(p), str(p), "--chunk-seconds", "1.0"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert "chunked" in doc["flags"]

    def test_missing_file_fails(self, tmp_path, capsys):
        missing = str(tmp_path / "missing.wav")
        assert main(["eval", missing, missing]) == 1
        assert "error:" in capsys.readouterr().err

    def test_bad_option_exits_two(self, wav_pair):
        with pytest.raises(SystemExit) as exc:
            main(["eval", *wav_pair, "--format", "xml"])
        assert exc.value.code == 2


class TestCurateCommand:
    def test_full_run_summary(self, tmp_path, curation_corpus, capsys):
        out = tmp_path / "out"
        code = main(["curate", "all", str(curation_corpus["dir"]), str(out)])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["total"] == 6
        assert doc["kept"] == 1
        assert doc["rejected_by_reason"]["true_peak_exceeded"] == 2
        assert (out / "decisions.jsonl").exists()

    def test_custom_thresholds(self, tmp_path, curation_corpus, capsys):
        out = tmp_path / "out"
        code = main(
            [
                "curate", "all", str(curation_corpus["dir"]), str(out),
                "--lufs-min", "-40", "--lufs-max", "0", "--dbtp-max", "2.0",
                "--jobs", "2",
            ]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        # the rate gate has no threshold, and the loud file's true peak
        # (about +4 dBTP for noise at -3 LUFS) still exceeds 2.0
        assert doc["kept"] == 4
        assert doc["rejected_by_reason"] == {"below_rate": 1, "true_peak_exceeded": 1}

    def test_missing_input_fails(self, tmp_path, capsys):
        assert main(["curate", "all", str(tmp_path / "absent"), str(tmp_path / "o")]) == 1
        assert "error:" in capsys.readouterr().err

    def test_bad_stage_exits_two(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["curate", "stage9", str(tmp_path), str(tmp_path)])
        assert exc.value.code == 2
