import pytest

from fmol import catalog
from fmol.errors import PatchError, SchemaError, ValueRangeError
from fmol.patch import (LfoConfig, Patch, TrackConfig, UnitConfig,
                        default_patch, validate_patch)


def test_default_patch_topology(patch):
    assert len(patch.tracks) == 6
    for t in patch.tracks:
        assert len(t.processors) == 3
        assert len(t.generator.lfos) == 4
        for p in t.processors:
            assert len(p.lfos) == 4
    validate_patch(patch)


def test_five_tracks_rejected(patch):
    with pytest.raises(PatchError):
        Patch(tracks=patch.tracks[:5])


def test_seven_tracks_rejected(patch):
    with pytest.raises(PatchError):
        Patch(tracks=patch.tracks + (patch.tracks[0],))


def test_two_processors_rejected(patch):
    t = patch.tracks[0]
    with pytest.raises(PatchError):
        TrackConfig(generator=t.generator, processors=t.processors[:2])


def test_three_lfos_rejected():
    with pytest.raises(PatchError):
        UnitConfig(0, catalog.default_params(0), tuple(LfoConfig() for _ in range(3)))


def test_param_out_of_range():
    with pytest.raises(ValueRangeError):
        UnitConfig(0, (1.5, 0.0, 0.0, 0.0, 0.0))


def test_lfo_field_ranges():
    with pytest.raises(ValueRangeError):
        LfoConfig(rate=25.0)
    with pytest.raises(ValueRangeError):
        LfoConfig(depth=1.5)
    with pytest.raises(ValueRangeError):
        LfoConfig(shape="wobble")


def test_unknown_unit_id_names_the_id(patch):
    t = patch.tracks[0]
    bad = TrackConfig(generator=UnitConfig(9999, (0.5,)), processors=t.processors)
    p = Patch(tracks=(bad,) + patch.tracks[1:])
    with pytest.raises(Exception) as exc:
        validate_patch(p)
    assert "9999" in str(exc.value)


def test_wrong_arity_is_schema_error(patch):
    t = patch.tracks[0]
    gen = UnitConfig(catalog.SINE_ID, (0.5, 0.5))  # sine takes 5 params
    p = Patch(tracks=(TrackConfig(generator=gen, processors=t.processors),)
              + patch.tracks[1:])
    with pytest.raises(SchemaError):
        validate_patch(p)


def test_processor_in_generator_slot_rejected(patch):
    t = patch.tracks[0]
    gen = UnitConfig(catalog.BYPASS_ID, catalog.default_params(catalog.BYPASS_ID))
    p = Patch(tracks=(TrackConfig(generator=gen, processors=t.processors),)
              + patch.tracks[1:])
    with pytest.raises(SchemaError):
        validate_patch(p)


def test_lfo_target_outside_schema_rejected(patch):
    t = patch.tracks[0]
    lfos = (LfoConfig(target=99),) + tuple(LfoConfig() for _ in range(3))
    gen = UnitConfig(catalog.SINE_ID, catalog.default_params(catalog.SINE_ID), lfos)
    p = Patch(tracks=(TrackConfig(generator=gen, processors=t.processors),)
              + patch.tracks[1:])
    with pytest.raises(SchemaError):
        validate_patch(p)
