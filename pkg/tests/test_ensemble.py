import numpy as np
import pytest

from stormrisk import (
    Ensemble,
    EnsemblePerturbationSpec,
    Grid,
    HollandParams,
    TimeAxis,
    Track,
    WindField,
    axisymmetric_field,
    generate_synthetic_ensemble,
    load_ensemble,
    mean_velocity,
    member_parameters,
    save_ensemble,
)

GRID = Grid(origin=(-30.0, -30.0), nx=5, ny=4, cell_size=12.0)
TIMES = TimeAxis(n_steps=6, dt=1.0)
TRACK = Track(x0=(0.0, -20.0), Vtr=(0.0, 3.0), duration=6.0)
PARAMS = HollandParams(Vm=37, Rm=30)


def _spec(**kw) -> EnsemblePerturbationSpec:
    base = dict(base_track=TRACK, base_params=PARAMS, seed=42, H=5)
    base.update(kw)
    return EnsemblePerturbationSpec(**base)


class TestSpecValidation:
    @pytest.mark.parametrize("bad", [{"sigma_track": -1.0}, {"sigma_Vm": -0.1}, {"H": 0}])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            _spec(**bad)


class TestGeneration:
    def test_zero_sigmas_gives_identical_members(self):
        ens = generate_synthetic_ensemble(_spec(H=5), GRID, TIMES)
        base = axisymmetric_field(TRACK, PARAMS, GRID, TIMES)
        assert ens.H == 5
        for m in ens.members:
            assert np.array_equal(m.velocities, base.velocities)

    def test_same_seed_reproduces_bit_identical(self):
        spec = _spec(sigma_track=5.0, sigma_heading=10.0, sigma_Vm=3.0, sigma_Rm=2.0)
        a = generate_synthetic_ensemble(spec, GRID, TIMES)
        b = generate_synthetic_ensemble(spec, GRID, TIMES)
        for ma, mb in zip(a.members, b.members):
            assert np.array_equal(ma.velocities, mb.velocities)

    def test_different_seed_differs(self):
        a = generate_synthetic_ensemble(_spec(sigma_Vm=3.0, seed=1), GRID, TIMES)
        b = generate_synthetic_ensemble(_spec(sigma_Vm=3.0, seed=2), GRID, TIMES)
        assert not np.array_equal(a.velocities(), b.velocities())

    def test_thread_count_does_not_change_results(self):
        spec = _spec(sigma_track=5.0, sigma_Vm=3.0, H=8)
        serial = generate_synthetic_ensemble(spec, GRID, TIMES, threads=1)
        parallel = generate_synthetic_ensemble(spec, GRID, TIMES, threads=4)
        assert np.array_equal(serial.velocities(), parallel.velocities())

    def test_sigma_vm_recovered_from_large_sample(self):
        # Std of the sample std for n = 1000 draws of N(0, 5) is about 0.11;
        # the tolerance 0.35 is ~3 sigma.
        spec = _spec(sigma_Vm=5.0, base_params=HollandParams(Vm=50, Rm=30), H=1000)
        children = np.random.SeedSequence(spec.seed).spawn(spec.H)
        vms = [member_parameters(spec, cs)[1].Vm for cs in children]
        assert np.std(vms, ddof=1) == pytest.approx(5.0, abs=0.35)
        assert np.mean(vms) == pytest.approx(50.0, abs=0.5)

    def test_vm_rm_truncated_below(self):
        spec = _spec(sigma_Vm=100.0, sigma_Rm=100.0, H=200)
        children = np.random.SeedSequence(spec.seed).spawn(spec.H)
        for cs in children:
            _, p = member_parameters(spec, cs)
            assert p.Vm >= 1.0
            assert p.Rm >= 1.0

    def test_heading_rotates_translation(self):
        spec = _spec(sigma_heading=30.0, H=50)
        children = np.random.SeedSequence(spec.seed).spawn(spec.H)
        speeds = []
        for cs in children:
            track, _ = member_parameters(spec, cs)
            speeds.append(np.hypot(*track.Vtr))
            assert track.Vtr != TRACK.Vtr  # direction changed
        # Rotation preserves translation speed.
        assert np.allclose(speeds, 3.0, atol=1e-12)


class TestEnsembleType:
    def test_requires_members(self):
        with pytest.raises(ValueError, match="at least one"):
            Ensemble(members=())

    def test_requires_identical_dimensions(self):
        a = axisymmetric_field(TRACK, PARAMS, GRID, TIMES)
        other = axisymmetric_field(TRACK, PARAMS, GRID, TimeAxis(n_steps=3))
        with pytest.raises(ValueError, match="member 1"):
            Ensemble(members=(a, other))


class TestMeanVelocity:
    def test_identical_members(self):
        ens = generate_synthetic_ensemble(_spec(H=3), GRID, TIMES)
        assert np.allclose(mean_velocity(ens), ens.members[0].velocities, rtol=1e-15, atol=0)

    def test_two_member_mean(self):
        v1 = np.full((GRID.n_cells, TIMES.n_steps), 10.0)
        v2 = np.full((GRID.n_cells, TIMES.n_steps), 30.0)
        ens = Ensemble(
            members=(
                WindField(grid=GRID, times=TIMES, velocities=v1),
                WindField(grid=GRID, times=TIMES, velocities=v2),
            )
        )
        assert np.all(mean_velocity(ens) == 20.0)

    def test_mean_within_member_envelope(self):
        spec = _spec(sigma_track=8.0, sigma_Vm=5.0, H=7)
        ens = generate_synthetic_ensemble(spec, GRID, TIMES)
        v = ens.velocities()
        m = mean_velocity(ens)
        assert np.all(m >= v.min(axis=0) - 1e-12)
        assert np.all(m <= v.max(axis=0) + 1e-12)


class TestEnsembleIO:
    def test_round_trip_bit_equal(self, tmp_path):
        spec = _spec(sigma_track=5.0, sigma_Vm=3.0, H=3)
        ens = generate_synthetic_ensemble(spec, GRID, TIMES)
        path = tmp_path / "ens.csv"
        save_ensemble(ens, path)
        loaded = load_ensemble(path)
        assert loaded.H == 3
        assert loaded.grid == GRID
        assert np.array_equal(loaded.velocities(), ens.velocities())

    def test_missing_row_named(self, tmp_path):
        ens = generate_synthetic_ensemble(_spec(H=2), GRID, TIMES)
        path = tmp_path / "ens.csv"
        save_ensemble(ens, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")  # drop last data row
        with pytest.raises(ValueError, match="missing velocity for member 1"):
            load_ensemble(path)

    def test_empty_file_reports_no_members(self, tmp_path):
        path = tmp_path / "ens.csv"
        path.write_text("member,cell_id,time_index,velocity_mps\n")
        (tmp_path / "ens.csv.json").write_text(
            '{"H": 1, "nx": 1, "ny": 1, "cell_size_km": 1.0, "n_steps": 1, "dt_h": 1.0}\n'
        )
        with pytest.raises(ValueError, match="no members"):
            load_ensemble(path)
