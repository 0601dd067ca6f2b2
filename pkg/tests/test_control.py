import numpy as np
import pytest

from newtsynth import ControlCsvError, NormalizationStats, read_control_csv
from newtsynth.control import ControlEncoder, ControlTrack, GruState, standardize, write_control_csv
from newtsynth.dsp import FrameSeries


def make_encoder(rng, hidden=16, input_size=2):
    scale = 1.0 / np.sqrt(hidden)
    return ControlEncoder(
        w_ih=rng.uniform(-scale, scale, (3 * hidden, input_size)),
        w_hh=rng.uniform(-scale, scale, (3 * hidden, hidden)),
        b_ih=rng.uniform(-scale, scale, 3 * hidden),
        b_hh=rng.uniform(-scale, scale, 3 * hidden),
        dense_weight=rng.uniform(-scale, scale, (hidden, hidden)),
        dense_bias=rng.uniform(-scale, scale, hidden),
    )


def frames_from(values, hop=128):
    return FrameSeries(values=np.asarray(values, dtype=float), hop_size=hop, sample_rate=16000)


class TestStandardize:
    STATS = NormalizationStats(mean=np.array([200.0, -30.0]), std=np.array([100.0, 10.0]))

    def test_direct_arithmetic(self):
        track = ControlTrack(f0=[100.0, 200.0, 300.0], loudness=[-30.0] * 3, hop_size=128)
        frames = standardize(track, self.STATS, 16000)
        np.testing.assert_allclose(frames.values[:, 0], [-1.0, 0.0, 1.0])
        np.testing.assert_allclose(frames.values[:, 1], [0.0, 0.0, 0.0])

    def test_identity_stats(self):
        stats = NormalizationStats(mean=np.zeros(2), std=np.ones(2))
        track = ControlTrack(f0=[220.0, 440.0], loudness=[-12.0, -6.0], hop_size=128)
        frames = standardize(track, stats, 16000)
        np.testing.assert_array_equal(frames.values[:, 0], track.f0)
        np.testing.assert_array_equal(frames.values[:, 1], track.loudness)

    def test_nonfinite_input_rejected(self):
        with pytest.raises(ValueError):
            ControlTrack(f0=[np.inf], loudness=[0.0], hop_size=128)


class TestGruStep:
    def test_zero_weights_keep_zero_state(self):
        enc = ControlEncoder(
            w_ih=np.zeros((48, 2)),
            w_hh=np.zeros((48, 16)),
            b_ih=np.zeros(48),
            b_hh=np.zeros(48),
            dense_weight=np.zeros((16, 16)),
            dense_bias=np.zeros(16),
        )
        state = enc.step(np.array([1.0, -1.0]), enc.initial_state())
        np.testing.assert_array_equal(state.h, np.zeros(16))

    def test_saturated_update_gate_copies_state(self, rng):
        enc = make_encoder(rng)
        d = enc.hidden_size
        enc.b_ih[d : 2 * d] = 50.0  # update gate pinned to 1
        h0 = GruState(rng.standard_normal(d) * 0.1)
        h1 = enc.step(rng.standard_normal(2), h0)
        np.testing.assert_allclose(h1.h, h0.h, atol=1e-12)

    def test_matches_torch_reference_cell(self, rng):
        torch = pytest.importorskip("torch")
        enc = make_encoder(rng, hidden=32)
        cell = torch.nn.GRUCell(2, 32).double()
        with torch.no_grad():
            cell.weight_ih.copy_(torch.from_numpy(enc.w_ih))
            cell.weight_hh.copy_(torch.from_numpy(enc.w_hh))
            cell.bias_ih.copy_(torch.from_numpy(enc.b_ih))
            cell.bias_hh.copy_(torch.from_numpy(enc.b_hh))
        state = enc.initial_state()
        h_ref = torch.zeros(1, 32, dtype=torch.float64)
        for _ in range(20):
            x = rng.standard_normal(2)
            state = enc.step(x, state)
            with torch.no_grad():
                h_ref = cell(torch.from_numpy(x)[None, :], h_ref)
            assert np.max(np.abs(state.h - h_ref.numpy()[0])) < 1e-5

    def test_output_finite_for_extreme_inputs(self, rng):
        enc = make_encoder(rng)
        state = enc.initial_state()
        for x in ([1e6, -1e6], [0.0, 0.0], [-1e3, 1e9]):
            state = enc.step(np.array(x, dtype=float), state)
            assert np.all(np.isfinite(state.h))


class TestEncode:
    def test_empty_frames_leave_state_unchanged(self, rng):
        enc = make_encoder(rng)
        state = GruState(rng.standard_normal(enc.hidden_size))
        z, new_state = enc.encode(frames_from(np.empty((0, 2))), state)
        assert z.shape == (0, enc.hidden_size)
        np.testing.assert_array_equal(new_state.h, state.h)

    def test_split_equals_whole(self, rng):
        enc = make_encoder(rng)
        values = rng.standard_normal((500, 2))
        z_whole, _ = enc.encode(frames_from(values), enc.initial_state())
        z1, mid = enc.encode(frames_from(values[:250]), enc.initial_state())
        z2, _ = enc.encode(frames_from(values[250:]), mid)
        np.testing.assert_array_equal(np.concatenate([z1, z2]), z_whole)

    def test_causality_by_perturbation(self, rng):
        enc = make_encoder(rng)
        values = rng.standard_normal((40, 2))
        z_base, _ = enc.encode(frames_from(values), enc.initial_state())
        perturbed = values.copy()
        perturbed[25] += 10.0
        z_pert, _ = enc.encode(frames_from(perturbed), enc.initial_state())
        np.testing.assert_array_equal(z_pert[:25], z_base[:25])
        assert np.any(z_pert[25:] != z_base[25:])


class TestControlCsv:
    def write(self, tmp_path, text):
        path = tmp_path / "control.csv"
        path.write_text(text)
        return path

    def test_round_trip(self, tmp_path):
        track = ControlTrack(
            f0=[220.0, 230.5], loudness=[-20.0, -19.0], hop_size=128, confidence=[0.9, 0.95]
        )
        path = tmp_path / "track.csv"
        write_control_csv(path, track)
        back = read_control_csv(path)
        np.testing.assert_allclose(back.f0, track.f0)
        np.testing.assert_allclose(back.loudness, track.loudness)
        np.testing.assert_allclose(back.confidence, track.confidence)

    def test_missing_f0_reports_row(self, tmp_path):
        path = self.write(tmp_path, "frame,f0_hz,loudness_db\n0,220.0,-20\n1,,-20\n")
        with pytest.raises(ControlCsvError) as err:
            read_control_csv(path)
        assert err.value.row == 3

    def test_nan_rejected(self, tmp_path):
        path = self.write(tmp_path, "frame,f0_hz,loudness_db\n0,nan,-20\n")
        with pytest.raises(ControlCsvError) as err:
            read_control_csv(path)
        assert err.value.row == 2

    def test_bad_header_rejected(self, tmp_path):
        path = self.write(tmp_path, "time,pitch\n0,220\n")
        with pytest.raises(ControlCsvError) as err:
            read_control_csv(path)
        assert err.value.row == 1

    def test_out_of_order_frame_rejected(self, tmp_path):
        path = self.write(tmp_path, "frame,f0_hz,loudness_db\n0,220,-20\n5,220,-20\n")
        with pytest.raises(ControlCsvError) as err:
            read_control_csv(path)
        assert err.value.row == 3
