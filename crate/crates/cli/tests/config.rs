use cmlwealth::fit::FitOptions;
use cmlwealth::{Analysis, SamplingProtocol, SweepGrid, Topology};
use cmlwealth_cli::config::CurveSpec;
use cmlwealth_cli::{parse_config, Command, RunConfig, Scalar};
use proptest::prelude::*;

#[test]
fn minimal_sweep_gets_defaults() {
    let cfg = parse_config(
        r#"
command = "sweep"
topology = "von-neumann"

[grid]
a_min = 0.2
a_max = 1.4
r_min = 10
r_max = 10
"#,
    )
    .unwrap();
    assert_eq!(cfg.command, Command::Sweep);
    assert_eq!(cfg.topology, Topology::VonNeumann4);
    assert_eq!(cfg.grid, SweepGrid { a_min: 0.2, a_max: 1.4, delta_a: 0.02, r_min: 10.0, r_max: 10.0, delta_r: 1.0 });
    assert_eq!(cfg.protocol, SamplingProtocol::desk());
    assert_eq!(cfg.analysis, Analysis::default());
    assert_eq!(cfg.analysis.bins, 100);
    assert_eq!(cfg.analysis.fit.threshold, 0.96);
    assert_eq!(cfg.out, "cmlwealth-out");
    assert_eq!((cfg.workers, cfg.force, cfg.scalar), (0, false, Scalar::F64));
}

#[test]
fn zero_delta_a_names_the_key() {
    let err = parse_config("command = \"sweep\"\n[grid]\ndelta_a = 0.0\n").unwrap_err();
    let msg = format!("{err:#}");
    assert!(msg.contains("delta_a"), "{msg}");
}

#[test]
fn invariant_violations_name_their_keys() {
    for (text, key) in [
        ("command = \"sweep\"\n[protocol]\nwindow = 0\n", "window"),
        ("command = \"sweep\"\n[protocol]\nlattice_side = 2\n", "lattice_side"),
        ("command = \"sweep\"\n[analysis]\nbins = 5\n", "bins"),
        ("command = \"sweep\"\n[analysis]\nthreshold = 1.5\n", "threshold"),
        ("command = \"simulate\"\n[params]\nr = -1\n", "r must"),
        ("command = \"gini-curve\"\ntopologies = []\n", "topologies"),
        ("command = \"transition\"\nsource = \"moore\"\ntarget = \"moore\"\n", "source"),
        ("command = \"sweep\"\n[grid]\nr_min = 5\nr_max = 4\n", "r_min"),
    ] {
        let msg = format!("{:#}", parse_config(text).unwrap_err());
        assert!(msg.contains(key), "expected `{key}` in: {msg}");
    }
}

#[test]
fn simulate_accepts_an_empty_window() {
    let cfg = parse_config("command = \"simulate\"\n[protocol]\nwindow = 0\ntransient = 0\n").unwrap();
    assert_eq!((cfg.protocol.window, cfg.protocol.transient), (0, 0));
}

fn topology() -> impl Strategy<Value = Topology> {
    prop::sample::select(Topology::ALL.to_vec())
}

fn config() -> impl Strategy<Value = RunConfig> {
    let command = prop::sample::select(vec![Command::Simulate, Command::Sweep, Command::GiniCurve, Command::Selftest]);
    let head = (command, topology(), prop::sample::subsequence(Topology::ALL.to_vec(), 1..=3), "[a-z][a-z0-9_/.-]{0,12}", 0usize..16, any::<bool>(), any::<bool>());
    let model = (1e-3f64..50.0, 0.0f64..3.0, 0.0f64..1.0, 1e-3f64..0.5, 0.0f64..2.0, 0.0f64..20.0, 0.1f64..5.0);
    let protocol = (3usize..400, 0u64..20_000, 1u64..200, 1u32..200, 0u64..=i64::MAX as u64, 0.0f64..10.0, 1e-6f64..100.0);
    let analysis = (10usize..500, 0.0f64..=1.0, 1u64..20, prop::option::of(1e-3f64..10.0), any::<bool>());
    (head, model, protocol, analysis).prop_map(|(h, m, p, an)| {
        let (command, topology, topologies, out, workers, force, f32) = h;
        let (r, a, a_min, delta_a, a_span, r_min, delta_r) = m;
        RunConfig {
            command,
            topology,
            source: Topology::Ring1D,
            target: topology,
            topologies,
            out,
            workers,
            force,
            scalar: if f32 { Scalar::F32 } else { Scalar::F64 },
            r,
            a,
            grid: SweepGrid { a_min, a_max: a_min + a_span, delta_a, r_min: r_min + 0.5, r_max: r_min + 10.0, delta_r },
            curve: CurveSpec { r, a_min, a_max: a_min + a_span, delta_a },
            protocol: SamplingProtocol {
                lattice_side: p.0,
                transient: p.1,
                window: p.2,
                realizations: p.3,
                master_seed: p.4,
                init_low: p.5,
                init_high: p.5 + p.6,
            },
            analysis: Analysis { bins: an.0, fit: FitOptions { threshold: an.1, min_bin_count: an.2, powerlaw_min_x: an.3 } },
            final_columns: an.4,
        }
    })
}

proptest! {
    #[test]
    fn serialized_config_reparses_equal(cfg in config()) {
        cfg.validate().unwrap();
        let text = cfg.to_toml().unwrap();
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml().unwrap(), text);
    }
}
