//! The bundled benchmark corpus: scaled-down circuits exercising the
//! behaviors the verifier is about — mode-flag fast paths, pipeline stalls,
//! diverging sign logic, trap handling, a secret-dependent exponentiation
//! step, the two comparison circuits against information-flow checking, and
//! crafted negatives for the race gate and the loop check.

/// One bundled design: Verilog source plus an optional sidecar annotation
/// set (the assumption configuration under which it verifies).
#[derive(Debug, Clone, Copy)]
pub struct Benchmark {
    pub name: &'static str,
    pub top: &'static str,
    pub verilog: &'static str,
    pub sidecar: Option<&'static str>,
}

pub fn bundle_benchmarks() -> Vec<Benchmark> {
    vec![
        Benchmark {
            name: "fpu_mul",
            top: "fpu_mul",
            verilog: include_str!("../benchmarks/fpu_mul.v"),
            sidecar: None,
        },
        Benchmark {
            name: "mips_stall",
            top: "mips_stall",
            verilog: include_str!("../benchmarks/mips_stall.v"),
            sidecar: Some(include_str!("../benchmarks/mips_stall.annot")),
        },
        Benchmark {
            name: "fpu_sign_case",
            top: "fpu_sign_case",
            verilog: include_str!("../benchmarks/fpu_sign_case.v"),
            sidecar: None,
        },
        Benchmark {
            name: "riscv_csr",
            top: "riscv_csr",
            verilog: include_str!("../benchmarks/riscv_csr.v"),
            sidecar: Some(include_str!("../benchmarks/riscv_csr.annot")),
        },
        Benchmark {
            name: "rsa_modexp",
            top: "rsa_modexp",
            verilog: include_str!("../benchmarks/rsa_modexp.v"),
            sidecar: None,
        },
        Benchmark {
            name: "a2",
            top: "a2",
            verilog: include_str!("../benchmarks/a2.v"),
            sidecar: None,
        },
        Benchmark {
            name: "a3",
            top: "a3",
            verilog: include_str!("../benchmarks/a3.v"),
            sidecar: Some(include_str!("../benchmarks/a3.annot")),
        },
        Benchmark {
            name: "racy_multi",
            top: "racy_multi",
            verilog: include_str!("../benchmarks/racy_multi.v"),
            sidecar: None,
        },
        Benchmark {
            name: "racy_rw",
            top: "racy_rw",
            verilog: include_str!("../benchmarks/racy_rw.v"),
            sidecar: None,
        },
        Benchmark {
            name: "comb_loop",
            top: "comb_loop",
            verilog: include_str!("../benchmarks/comb_loop.v"),
            sidecar: None,
        },
    ]
}

pub fn benchmark(name: &str) -> Option<Benchmark> {
    bundle_benchmarks().into_iter().find(|b| b.name == name)
}
