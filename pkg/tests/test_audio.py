import struct
import wave

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from adaptivebgm.audio import (AudioClip, GainAutomation, RampTracker,
                               RenderConfig, StemBank, gain_at, load_wav,
                               render_mix, save_wav)
from adaptivebgm.mapping import GainSchedule, MixDirective

SR = 48000


def clip(samples, rate=SR):
    return AudioClip(sample_rate=rate, samples=np.asarray(samples, dtype=float))


def schedule_of(gains_per_tick, tick_rate=60):
    directives = tuple(
        MixDirective(tick=i, gain_drums=d, gain_strings=s, gain_others=o)
        for i, (d, s, o) in enumerate(gains_per_tick))
    return GainSchedule(tick_rate=tick_rate, directives=directives)


def constant_schedule(d, s, o, ticks):
    return schedule_of([(d, s, o)] * ticks)


class TestAudioClip:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            AudioClip(sample_rate=SR, samples=np.array([]))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            clip([0.0, np.nan])

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            AudioClip(sample_rate=0, samples=np.zeros(4))

    def test_mono(self):
        assert clip([0.0, 0.1]).channels == 1


class TestWavIO:
    def test_pcm_scaling(self, tmp_path):
        path = tmp_path / "t.wav"
        with wave.open(str(path), "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(2)
            w.setframerate(SR)
            w.writeframes(struct.pack("<3h", 0, 16384, -16384))
        loaded = load_wav(path)
        assert loaded.sample_rate == SR
        assert loaded.samples.tolist() == [0.0, 0.5, -0.5]

    def test_stereo_downmix_averages(self, tmp_path):
        path = tmp_path / "st.wav"
        left = int(round(0.2 * 32768))
        right = int(round(0.4 * 32768))
        with wave.open(str(path), "wb") as w:
            w.setnchannels(2)
            w.setsampwidth(2)
            w.setframerate(SR)
            w.writeframes(struct.pack("<2h", left, right))
        loaded = load_wav(path)
        assert loaded.samples[0] == pytest.approx(0.3, abs=1 / 32768)

    def test_save_clamps_and_quantizes(self, tmp_path):
        path = tmp_path / "c.wav"
        save_wav(clip([1.5, 0.0, -2.0]), path)
        with wave.open(str(path), "rb") as w:
            assert w.getnchannels() == 1
            assert w.getsampwidth() == 2
            assert w.getframerate() == SR
            raw = w.readframes(3)
        assert struct.unpack("<3h", raw) == (32767, 0, -32768)

    def test_roundtrip_within_quantization_bound(self, tmp_path):
        rng = np.random.default_rng(4)
        original = rng.uniform(-1, 1, size=2000)
        path = tmp_path / "r.wav"
        save_wav(clip(original), path)
        back = load_wav(path)
        assert np.max(np.abs(back.samples - original)) <= 1 / 32768

    @given(arrays(np.float64, st.integers(1, 64),
                  elements=st.floats(-1, 1, allow_nan=False, width=32)))
    @settings(max_examples=30, deadline=None)
    def test_roundtrip_property(self, tmp_path_factory, samples):
        path = tmp_path_factory.mktemp("wav") / "p.wav"
        save_wav(clip(samples), path)
        back = load_wav(path)
        assert np.max(np.abs(back.samples - samples)) <= 1 / 32768

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_wav(tmp_path / "absent.wav")

    def test_rejects_8bit(self, tmp_path):
        path = tmp_path / "8.wav"
        with wave.open(str(path), "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(1)
            w.setframerate(SR)
            w.writeframes(b"\x00\x7f")
        with pytest.raises(ValueError, match="16-bit"):
            load_wav(path)

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "g.wav"
        path.write_bytes(b"not a riff file at all")
        with pytest.raises(ValueError):
            load_wav(path)


class TestStemBank:
    def test_rejects_rate_mismatch(self):
        a, b = clip(np.zeros(64)), clip(np.zeros(64), rate=44100)
        with pytest.raises(ValueError, match="sample rate"):
            StemBank(drums=a, strings=b, others=a)

    def test_rejects_length_mismatch(self):
        a, b = clip(np.zeros(64)), clip(np.zeros(65))
        with pytest.raises(ValueError, match="length"):
            StemBank(drums=a, strings=b, others=a)


class TestGainAt:
    def test_constant_schedule(self):
        sched = constant_schedule(0.3, 0.5, 0.7, ticks=6)
        for sample in (0, 100, 4000):
            assert gain_at(sched, sample, SR, RenderConfig()) == (0.3, 0.5, 0.7)

    def test_ramp_midpoint(self):
        # 0.10 -> 0.20 at tick 6 with a 50 ms ramp: halfway after 25 ms.
        sched = schedule_of([(0.10, 0.1, 0.1)] * 6 + [(0.20, 0.1, 0.1)] * 6)
        boundary = 6 * SR // 60
        g = gain_at(sched, boundary + SR // 40, SR, RenderConfig(ramp_ms=50))
        assert g[0] == pytest.approx(0.15, abs=1e-12)

    def test_zero_ramp_steps_instantly(self):
        sched = schedule_of([(0.10, 0.1, 0.1)] * 6 + [(0.20, 0.1, 0.1)] * 6)
        boundary = 6 * SR // 60
        cfg = RenderConfig(ramp_ms=0)
        assert gain_at(sched, boundary - 1, SR, cfg)[0] == 0.10
        assert gain_at(sched, boundary, SR, cfg)[0] == 0.20

    def test_holds_boundary_values_outside_span(self):
        sched = schedule_of([(0.10, 0.1, 0.1)] * 2 + [(0.60, 0.1, 0.1)] * 2)
        cfg = RenderConfig(ramp_ms=5)
        assert gain_at(sched, -50, SR, cfg)[0] == 0.10
        assert gain_at(sched, 10 ** 9, SR, cfg)[0] == 0.60

    def test_point_queries_match_vectorized_curve(self):
        rng = np.random.default_rng(11)
        values = rng.choice([0.10, 0.25, 0.40, 0.75], size=40)
        auto = GainAutomation(values, tick_rate=60, sample_rate=SR, ramp_ms=50)
        n = 40 * SR // 60
        curve = auto.curve(n)
        for sample in rng.integers(0, n, size=200):
            assert curve[sample] == pytest.approx(auto.value_at(int(sample)),
                                                  abs=1e-15)

    def test_ramp_tracker_matches_batch_automation(self):
        rng = np.random.default_rng(12)
        values = rng.choice([0.10, 0.35, 0.60, 0.75], size=30)
        auto = GainAutomation(values, 60, SR, ramp_ms=50)
        tracker = RampTracker(values[0], SR, ramp_ms=50)
        chunks = []
        for t, v in enumerate(values):
            b0, b1 = t * SR // 60, (t + 1) * SR // 60
            tracker.set_target(b0, v)
            chunks.append(tracker.curve(b0, b1))
        incremental = np.concatenate(chunks)
        assert np.array_equal(incremental, auto.curve(len(incremental)))

    def test_per_sample_step_bounded_for_largest_transition(self):
        sched = schedule_of([(0.10, 0.1, 0.1)] * 6 + [(0.75, 0.1, 0.1)] * 12)
        auto = GainAutomation([d.gain_drums for d in sched.directives],
                              60, SR, ramp_ms=50)
        curve = auto.curve(18 * SR // 60)
        bound = 0.65 / (0.05 * SR)
        assert np.max(np.abs(np.diff(curve))) <= bound + 1e-15


class TestRenderMix:
    def test_identity_gains_loop_and_sum(self, short_stems):
        ticks = 16
        sched = constant_schedule(1.0, 1.0, 1.0, ticks)
        out = render_mix(short_stems, sched).clip
        n = ticks * SR // 60
        loop = short_stems.loop_length
        expected = sum(np.resize(c.samples, n) for c in short_stems.clips())
        assert n > loop  # the schedule actually wraps the loop
        np.testing.assert_allclose(out.samples, expected, atol=1e-12)

    def test_zero_gains_are_silence(self, short_stems):
        out = render_mix(short_stems, constant_schedule(0, 0, 0, 4)).clip
        assert np.all(out.samples == 0.0)

    def test_single_stem_isolation(self, short_stems):
        sched = constant_schedule(0.0, 1.0, 0.0, 4)
        out = render_mix(short_stems, sched).clip
        n = len(out)
        np.testing.assert_array_equal(
            out.samples, np.resize(short_stems.strings.samples, n))

    def test_linearity_of_gain(self, short_stems):
        sched = constant_schedule(0.5, 0.0, 0.0, 4)
        out = render_mix(short_stems, sched).clip
        n = len(out)
        expected = 0.5 * np.resize(short_stems.drums.samples, n)
        assert np.max(np.abs(out.samples - expected)) < 1e-9

    def test_superposition(self, short_stems):
        full = render_mix(short_stems, constant_schedule(0.4, 0.3, 0.2, 6)).clip
        parts = [render_mix(short_stems, constant_schedule(*g, 6)).clip.samples
                 for g in ((0.4, 0, 0), (0, 0.3, 0), (0, 0, 0.2))]
        assert np.max(np.abs(full.samples - sum(parts))) < 1e-9

    def test_output_length_floors(self, short_stems):
        sched = constant_schedule(1, 1, 1, 5)
        out = render_mix(short_stems, sched).clip
        assert len(out) == 5 * SR // 60

    def test_clipping_counted_and_clamped(self):
        hot = clip(np.full(1600, 0.9))
        bank = StemBank(drums=hot, strings=hot, others=hot)
        result = render_mix(bank, constant_schedule(1, 1, 1, 2))
        assert result.clipped_samples == len(result.clip)
        assert np.all(result.clip.samples == 1.0)

    def test_no_loop_pads_silence(self, short_stems):
        ticks = 16
        sched = constant_schedule(0, 1, 0, ticks)
        out = render_mix(short_stems, sched, RenderConfig(loop=False)).clip
        loop = short_stems.loop_length
        np.testing.assert_array_equal(out.samples[:loop],
                                      short_stems.strings.samples)
        assert np.all(out.samples[loop:] == 0.0)

    def test_output_finite_and_bounded(self, short_stems):
        sched = constant_schedule(0.75, 0.75, 0.75, 8)
        out = render_mix(short_stems, sched).clip
        assert np.all(np.isfinite(out.samples))
        assert np.max(np.abs(out.samples)) <= 1.0
