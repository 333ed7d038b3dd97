use mulrnn::cells::{param_count, param_count_with, Cell, CellDims, CellKind, CellOptions, InitScheme, MlstmForm};
use mulrnn::tensor::Rng;
use mulrnn::train::{solve_budget, solve_hidden_size};

/// Counts parameters by materializing them.
fn enumerate(kind: CellKind, dims: CellDims, options: CellOptions) -> usize {
    Cell::new(kind, dims)
        .with_options(options)
        .init_params(&mut Rng::new(0), InitScheme::default())
        .iter()
        .map(|(_, m)| m.len())
        .sum()
}

#[test]
fn closed_form_counts_equal_enumeration() {
    let mut rng = Rng::new(2024);
    for _ in 0..20 {
        let dims = CellDims::new(1 + rng.below(60), 1 + rng.below(60), 1 + rng.below(60)).unwrap();
        for kind in CellKind::ALL {
            assert_eq!(param_count(kind, dims), enumerate(kind, dims, CellOptions::default()), "{kind} {dims:?}");
        }
        let printed = CellOptions {
            mlstm_form: MlstmForm::Printed,
            ..Default::default()
        };
        assert_eq!(
            param_count_with(CellKind::Mlstm, dims, printed),
            enumerate(CellKind::Mlstm, dims, printed)
        );
    }
}

#[test]
fn hand_counts() {
    // U 8x7 + V 8x5 + W_x 5x7 + W_h 5x8 + b 8
    assert_eq!(param_count(CellKind::Mrnn, CellDims::new(7, 8, 5).unwrap()), 179);
    // 27 slices of 64x64 plus U and b
    let trnn = param_count(CellKind::Trnn, CellDims::new(27, 64, 27).unwrap());
    assert_eq!(trnn, 27 * 64 * 64 + 64 * 27 + 64);
}

#[test]
fn ptb_style_budget_within_five_percent() {
    for vocab in [50, 27] {
        let anchor = param_count(CellKind::Mlstm, CellDims::new(vocab, 700, vocab).unwrap());
        assert_eq!(solve_hidden_size(CellKind::Mlstm, vocab, vocab, anchor).unwrap(), 700);
        let rows = solve_budget(
            &[CellKind::Mgru, CellKind::Tmlstm, CellKind::Tmgru],
            vocab,
            vocab,
            anchor,
        )
        .unwrap();
        for r in rows {
            assert!(r.rel_dev.abs() < 0.05, "{:?}", r);
            assert_eq!(r.params, enumerate(r.kind, CellDims::new(vocab, r.hidden, vocab).unwrap(), CellOptions::default()));
        }
    }
}

#[test]
fn text8_style_budget_within_five_percent() {
    let anchor = param_count(CellKind::Mlstm, CellDims::new(27, 450, 27).unwrap());
    for r in solve_budget(&CellKind::ALL, 27, 27, anchor).unwrap() {
        assert!(r.rel_dev.abs() < 0.05, "{:?}", r);
    }
}
