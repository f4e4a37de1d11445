//! Independent brute-force oracles for the algorithm cost models: each
//! oracle counts operations by literally running the loop structure it
//! models, never by evaluating the closed form under test.

use forge::algobank::AlgoBank;

/// Inner-product matrix multiply: per output cell, n multiplications
/// and n-1 additions, counted one by one.
fn count_matmul_ops(n: u64) -> u64 {
    let mut ops = 0u64;
    for _i in 0..n {
        for _j in 0..n {
            for _k in 0..n {
                ops += 1; // multiply
            }
            for _k in 0..n.saturating_sub(1) {
                ops += 1; // accumulate
            }
        }
    }
    ops
}

/// Elementwise add: one addition per cell.
fn count_matadd_ops(n: u64) -> u64 {
    let mut ops = 0;
    for _i in 0..n {
        for _j in 0..n {
            ops += 1;
        }
    }
    ops
}

/// Full scan per selection step.
fn count_minscan_ops(n: u64) -> u64 {
    let mut ops = 0;
    for _i in 0..n {
        for _j in 0..n {
            ops += 1;
        }
    }
    ops
}

/// n operations per halving round, rounds counted by explicit doubling
/// instead of bit arithmetic.
fn count_sort_ops(n: u64) -> u64 {
    let mut rounds = 0u64;
    let mut reach = 1u64;
    while reach < n {
        reach *= 2;
        rounds += 1;
    }
    n * rounds
}

#[test]
fn square_family_matches_counted_loops() {
    let bank = AlgoBank::builtin();
    for n in 1..=64 {
        let matmul = bank.lookup("matmul").unwrap().eval_cost(n).unwrap();
        assert_eq!(matmul, count_matmul_ops(n) as f64, "matmul n={n}");
        let matmul2 = bank.lookup("matmul2").unwrap().eval_cost(n).unwrap();
        assert_eq!(matmul2, count_matmul_ops(n) as f64, "matmul2 n={n}");
        for id in ["matadd", "matadd2"] {
            let got = bank.lookup(id).unwrap().eval_cost(n).unwrap();
            assert_eq!(got, count_matadd_ops(n) as f64, "{id} n={n}");
        }
    }
}

#[test]
fn scan_sort_and_scalar_match_counted_loops() {
    let bank = AlgoBank::builtin();
    for n in 1..=64 {
        for id in ["mst", "tsp"] {
            let got = bank.lookup(id).unwrap().eval_cost(n).unwrap();
            assert_eq!(got, count_minscan_ops(n) as f64, "{id} n={n}");
        }
        let sort = bank.lookup("sort").unwrap().eval_cost(n).unwrap();
        assert_eq!(sort, count_sort_ops(n) as f64, "sort n={n}");
        let gp = bank.lookup("gp_op").unwrap().eval_cost(n).unwrap();
        assert_eq!(gp, 1.0, "gp_op n={n}");
        let transpose = bank.lookup("mattrans").unwrap().eval_cost(n).unwrap();
        assert_eq!(transpose, 0.0, "mattrans performs no arithmetic");
    }
}

#[test]
fn elimination_family_is_cubic_over_three() {
    let bank = AlgoBank::builtin();
    // Pinned waypoints of the stated (2n^3 + 1)/3 count.
    let expected = [(1u64, 1.0), (2, 5.0), (3, 18.0), (4, 43.0), (10, 667.0)];
    for id in ["matinv", "lud"] {
        let entry = bank.lookup(id).unwrap();
        for (n, want) in expected {
            assert_eq!(entry.eval_cost(n).unwrap(), want, "{id} n={n}");
        }
        for n in 1..=64u64 {
            let got = entry.eval_cost(n).unwrap();
            assert_eq!(got, ((2 * n * n * n + 1) / 3) as f64, "{id} n={n}");
        }
    }
}

#[test]
fn costs_are_non_decreasing_in_problem_size() {
    let bank = AlgoBank::builtin();
    for entry in bank.entries() {
        let mut prev = entry.eval_cost(1).unwrap();
        for n in 2..=256 {
            let next = entry.eval_cost(n).unwrap();
            assert!(
                next >= prev,
                "{} cost decreased from {prev} to {next} at n={n}",
                entry.id
            );
            prev = next;
        }
    }
}

#[test]
fn internal_dataflow_counts_follow_the_operation_count() {
    let bank = AlgoBank::builtin();
    for entry in bank.entries() {
        for n in 1..=32u64 {
            let ops = entry.eval_cost(n).unwrap() as u64;
            let (fan_in, fan_out) = entry.eval_internal(n).unwrap();
            if entry.id == "mattrans" {
                // Transposition moves every cell without computing.
                assert_eq!((fan_in, fan_out), (n * n, n * n));
            } else {
                assert_eq!(fan_in, 2 * ops, "{} n={n}", entry.id);
                assert_eq!(fan_out, ops, "{} n={n}", entry.id);
            }
        }
    }
}

#[test]
fn output_bytes_scale_with_the_result_shape() {
    let bank = AlgoBank::builtin();
    let cell = |id: &str, n: u64| bank.lookup(id).unwrap().output_bytes(n).unwrap();
    for n in 1..=32u64 {
        // Matrix results: n^2 elements at 8 bytes each.
        for id in ["matmul", "matadd", "mattrans", "matinv", "lud", "matadd2", "matmul2"] {
            assert_eq!(cell(id, n), (n * n * 8).max(1), "{id} n={n}");
        }
        // Sequence results: n elements.
        for id in ["mst", "tsp", "sort"] {
            assert_eq!(cell(id, n), (n * 8).max(1), "{id} n={n}");
        }
        assert_eq!(cell("gp_op", n), 8);
    }
    // Output sizes never shrink as n grows.
    for entry in bank.entries() {
        let mut prev = entry.output_bytes(1).unwrap();
        for n in 2..=256 {
            let next = entry.output_bytes(n).unwrap();
            assert!(next >= prev, "{} output shrank at n={n}", entry.id);
            prev = next;
        }
    }
}
