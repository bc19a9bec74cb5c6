import random

import pytest

from scenquery.bench import (
    BenchCell,
    BenchSpec,
    build_family_program,
    family_machine,
    generate_instance,
    instance_digests,
    render_table,
    run_bench,
)
from scenquery.engine import membership, membership_oracle
from scenquery.scenic.parser import parse_program


class TestFamilyPrograms:
    @pytest.mark.parametrize("family,stem", [
        ("dountil_n", "n_dountil"),
        ("do_n", "n_do"),
        ("try_n", "try_n"),
        ("nested_n", "nested_try"),
    ])
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_builders_match_transcribed_fixtures(self, a4_programs, family, stem, n):
        built = parse_program(build_family_program(family, n))
        fixture = parse_program(a4_programs[f"{stem}_{n}"])
        assert built == fixture

    def test_families_extend_beyond_four(self):
        for family in ("dountil_n", "do_n", "try_n", "nested_n"):
            program = parse_program(build_family_program(family, 6))
            assert program.behavior("TestParseBehavior") is not None


class TestInstances:
    @pytest.mark.parametrize("family", ["do_n", "dountil_n", "try_n", "nested_n"])
    def test_generated_instances_survive_and_match(self, family):
        for n in (1, 3):
            inst = generate_instance(family, n, 12, seed=42, index=n)
            assert len(inst.query.observed) == 12
            assert all(a is not None for a in inst.query.observed)
            result = membership(inst.query)
            assert result.matched and result.window == (0, 12)

    def test_instance_agrees_with_oracle(self):
        inst = generate_instance("try_n", 2, 10, seed=7)
        assert membership(inst.query).matched
        assert membership_oracle(inst.query).matched

    def test_adversarial_flip(self):
        base = generate_instance("dountil_n", 2, 10, seed=9)
        adv = generate_instance("dountil_n", 2, 10, seed=9, adversarial=True)
        assert adv.query.observed != base.query.observed
        assert adv.digest != base.digest

    def test_shared_condition_roles_draw_identical_coins(self):
        """Condition ids are numbered outside-in, so cells at adjacent N
        share coin streams for their common structure (paired comparisons)."""
        a = generate_instance("nested_n", 2, 10, seed=5, index=3)
        b = generate_instance("nested_n", 3, 10, seed=5, index=3)
        shared = set(a.query.streams) & set(b.query.streams)
        assert "cond_interrupt_1_1" in shared
        for cond_id in shared:
            va = a.query.streams[cond_id].values
            vb = b.query.streams[cond_id].values
            if va != vb:
                # only the survival-pinned terminator may differ in role
                assert cond_id in (f"cond_until_{2*2}_0", f"cond_until_{2*3}_0")

    def test_fixed_seed_reproducible_instances(self):
        spec = BenchSpec(family="dountil_n", n_range=(1, 2), t_range=(6, 12, 6),
                         k=3, seed=123)
        assert instance_digests(spec) == instance_digests(spec)

    def test_different_seed_changes_instances(self):
        # N=2 so at least one terminator stream carries coin flips
        a = BenchSpec(family="dountil_n", n_range=(2, 2), t_range=(8, 8, 1),
                      k=3, seed=1)
        b = BenchSpec(family="dountil_n", n_range=(2, 2), t_range=(8, 8, 1),
                      k=3, seed=2)
        assert instance_digests(a) != instance_digests(b)


class TestRunBench:
    def test_small_run_produces_cells(self):
        spec = BenchSpec(family="do_n", n_range=(1, 2), t_range=(6, 12, 6),
                         k=2, seed=5)
        cells = run_bench(spec)
        assert len(cells) == 4
        for cell in cells:
            assert not cell.timed_out
            assert cell.mean is not None and cell.mean <= spec.e_max
            assert cell.timed_out != (cell.mean <= spec.e_max)

    def test_single_row_table(self):
        spec = BenchSpec(family="dountil_n", n_range=(2, 2), t_range=(6, 6, 1),
                         k=2, seed=5)
        cells = run_bench(spec)
        table = render_table("dountil_n", cells)
        rows = [r for r in table.splitlines() if r.startswith("| 2")]
        assert len(rows) == 1

    def test_timed_out_cells_render_dash(self):
        table = render_table("nested_n", [
            BenchCell(n=1, t=10, mean=0.5, std=0.1, timed_out=False),
            BenchCell(n=2, t=10, mean=None, std=None, timed_out=True),
        ])
        assert "–" in table

    def test_bad_spec_rejected(self):
        with pytest.raises(ValueError):
            BenchSpec(family="nope", n_range=(1, 2), t_range=(10, 10, 1))
        with pytest.raises(ValueError):
            BenchSpec(family="do_n", n_range=(2, 1), t_range=(10, 10, 1))
