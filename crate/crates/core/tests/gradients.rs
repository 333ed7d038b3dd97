use mulrnn::cells::{CellKind, CellOptions, LstmOutput, MlstmForm};
use mulrnn::cli::gradient_report;
use mulrnn::tensor::GradCheckReport;

/// The loss is about ln 7 ~ 2, whose ulp is 4.4e-16; at step 1e-5 central
/// differences are quantized to ~2.2e-11, so entries smaller than ~1e-7
/// cannot meet a 1e-4 relative tolerance. Allow a few quanta of absolute
/// error for those.
const FD_FLOOR: f64 = 1e-10;

fn report(kind: CellKind, options: CellOptions, seed: u64, step: f64) -> GradCheckReport {
    gradient_report(kind, 7, 8, 5, 3, 4, options, seed, step, 1e-4).unwrap()
}

fn assert_law(kind: CellKind, r: &GradCheckReport) {
    for p in &r.params {
        assert!(
            p.max_rel_err < 1e-4 || p.max_abs_err_over_tol <= FD_FLOOR,
            "{kind} {}: rel err {:e} at {} (analytic {:e}, numeric {:e}), abs err over tol {:e}",
            p.name,
            p.max_rel_err,
            p.worst_index,
            p.analytic,
            p.numeric,
            p.max_abs_err_over_tol
        );
    }
}

#[test]
fn every_kind_matches_finite_differences() {
    for seed in 0..3 {
        for kind in CellKind::ALL {
            assert_law(kind, &report(kind, CellOptions::default(), seed, 1e-5));
        }
    }
}

#[test]
fn larger_step_passes_strictly() {
    // at step 1e-4 quantization drops tenfold while truncation stays ~1e-8
    for kind in CellKind::ALL {
        let r = report(kind, CellOptions::default(), 0, 1e-4);
        assert!(r.passed(), "{kind}: {:e}", r.max_rel_err());
    }
}

#[test]
fn option_variants_match_finite_differences() {
    let printed = CellOptions {
        mlstm_form: MlstmForm::Printed,
        ..Default::default()
    };
    let tanh = CellOptions {
        lstm_output: LstmOutput::Tanh,
        ..Default::default()
    };
    assert_law(CellKind::Mlstm, &report(CellKind::Mlstm, printed, 1, 1e-5));
    for kind in [CellKind::Lstm, CellKind::Mlstm, CellKind::Tmlstm] {
        assert_law(kind, &report(kind, tanh, 2, 1e-5));
    }
}
