//! Implementations of the CLI verbs.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use genie_mac_core::{
    bounds_for_size, check_feasible, degraded_sum_capacity, dof, ensemble, optimize_fstar,
    optimize_subset, region_outer_bound, sic_sum_rate, Certificate, ChannelInstance,
    DegradedChannel, OptimizerConfig, OrderedSubset, SubsetBound,
};

use crate::files::{matrix_to_rows, CertificateFile, ChannelFile, InstanceFile};
use crate::report::{f17, res, UNITS_HEADER};
use crate::AppError;

fn channel_banner(cmd: &str, ch: &ChannelInstance, label: &Option<String>) {
    println!("# genie-mac {cmd} - {UNITS_HEADER}");
    match label {
        Some(l) => println!("channel: K={}, P={}, N={} [{l}]", ch.k(), ch.p(), ch.n()),
        None => println!("channel: K={}, P={}, N={}", ch.k(), ch.p(), ch.n()),
    }
}

/// Decoding order of the canonical users, expressed in source user numbers.
fn decode_order(dc: &DegradedChannel) -> String {
    let order: Vec<String> = dc.perm().iter().map(|&i| (i + 1).to_string()).collect();
    format!("({})", order.join(","))
}

fn rate_table(dc: &DegradedChannel) {
    let alloc = sic_sum_rate(dc);
    println!("user  a_i                     b_i                     rate_bits");
    // Rows in source user order; canonical position i belongs to source
    // user perm[i].
    let mut rows: Vec<(usize, usize)> = dc.perm().iter().copied().enumerate().collect();
    rows.sort_by_key(|&(_, source)| source);
    for (pos, source) in rows {
        println!(
            "{:<5} {:<23} {:<23} {}",
            source + 1,
            f17(dc.a()[pos]),
            f17(dc.b()[pos]),
            f17(alloc.rates[pos])
        );
    }
    println!("SIC achievable sum: {}", f17(alloc.sum));
}

pub fn rates(channel: &Path, tol: f64) -> Result<i32, AppError> {
    let (ch, label) = ChannelFile::load(channel)?;
    let dc = ch.factor_degraded(tol)?;
    channel_banner("rates", &ch, &label);
    println!("decoding order (source users): {}", decode_order(&dc));
    rate_table(&dc);
    Ok(0)
}

pub fn sumcap(channel: &Path, tol: f64) -> Result<i32, AppError> {
    let (ch, label) = ChannelFile::load(channel)?;
    let dc = ch.factor_degraded(tol)?;
    channel_banner("sumcap", &ch, &label);
    println!("decoding order (source users): {}", decode_order(&dc));
    rate_table(&dc);
    let capacity = degraded_sum_capacity(&dc);
    println!("sum capacity:       {}", f17(capacity));
    let cert = Certificate::build(&dc)?;
    let report = cert.verify(&dc, tol);
    let passed = report.checks.iter().filter(|c| c.pass).count();
    println!(
        "certificate: {passed}/{} checks passed, max residual {} (tol {})",
        report.checks.len(),
        res(report.max_residual),
        res(report.tol)
    );
    println!(
        "certificate bound:  {} (Cholesky) / {} (VF diagonal)",
        f17(cert.bound_bits()),
        f17(cert.vf_diag_bits())
    );
    println!("degrees of freedom: {}", dof(&dc));
    if report.all_pass {
        Ok(0)
    } else {
        Err(AppError::Domain(format!(
            "certificate verification failed: max residual {}",
            res(report.max_residual)
        )))
    }
}

pub fn certificate(channel: &Path, out: Option<&Path>, tol: f64) -> Result<i32, AppError> {
    let (ch, label) = ChannelFile::load(channel)?;
    let dc = ch.factor_degraded(tol)?;
    let cert = Certificate::build(&dc)?;
    let report = cert.verify(&dc, tol);
    channel_banner("certificate", &ch, &label);
    println!("decoding order (source users): {}", decode_order(&dc));
    for check in &report.checks {
        println!(
            "check {:<24} residual {}  [{}]",
            check.name,
            res(check.residual),
            if check.pass { "pass" } else { "FAIL" }
        );
    }
    println!(
        "bound: {} (Cholesky) / {} (VF diagonal)",
        f17(cert.bound_bits()),
        f17(cert.vf_diag_bits())
    );
    if !report.all_pass {
        return Err(AppError::Domain(format!(
            "certificate verification failed: max residual {}",
            res(report.max_residual)
        )));
    }
    if let Some(path) = out {
        let (subset, inst) = cert.to_genie_instance(&dc)?;
        let file = CertificateFile {
            label,
            subset: subset.indices().iter().map(|&i| i + 1).collect(),
            g: matrix_to_rows(inst.g()),
            sigma: matrix_to_rows(inst.sigma()),
            t: matrix_to_rows(inst.t()),
            c: cert.c().iter().copied().collect(),
            d: matrix_to_rows(cert.d()),
            v: matrix_to_rows(cert.v()),
            bound_bits: cert.bound_bits(),
            vf_diag_bits: cert.vf_diag_bits(),
        };
        let json = serde_json::to_string_pretty(&file)
            .map_err(|e| AppError::Usage(format!("cannot serialize certificate: {e}")))?;
        std::fs::write(path, json)
            .map_err(|e| AppError::Usage(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote certificate to {}", path.display());
    }
    Ok(0)
}

pub fn verify(channel: &Path, instance: &Path, tol: f64) -> Result<i32, AppError> {
    let (ch, label) = ChannelFile::load(channel)?;
    let (subset, gm) = InstanceFile::load(instance)?.into_parts(ch.k())?;
    let h_s = ch.submatrix(&subset)?;
    let report = check_feasible(&gm, &h_s, ch.n(), tol)?;
    channel_banner("verify", &ch, &label);
    println!("subset: {subset}");
    println!("match residual:       {}", res(report.match_residual));
    println!("noise excess:         {}", res(report.noise_excess));
    println!("sigma min eigenvalue: {}", res(report.sigma_min_eigenvalue));
    let value = gm.mac_sum_capacity(ch.p())?;
    println!("MAC sum-capacity bound: {}", f17(value));
    if report.feasible {
        println!("feasible: yes (tol {})", res(tol));
        Ok(0)
    } else {
        println!("feasible: NO (tol {})", res(tol));
        Err(AppError::Domain(format!(
            "instance is not feasible: match residual {}, noise excess {}",
            res(report.match_residual),
            res(report.noise_excess)
        )))
    }
}

/// Subset specification: "all", "size=k", or an explicit order "1,3,2".
enum SubsetSpec {
    All,
    Size(usize),
    Explicit(Vec<usize>),
}

fn parse_subset_spec(spec: &str) -> Result<SubsetSpec, AppError> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("all") {
        return Ok(SubsetSpec::All);
    }
    if let Some(size) = spec.strip_prefix("size=") {
        let size: usize = size
            .parse()
            .map_err(|_| AppError::Usage(format!("invalid subset size in {spec:?}")))?;
        return Ok(SubsetSpec::Size(size));
    }
    let indices = spec
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| AppError::Usage(format!("invalid subset spec {spec:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SubsetSpec::Explicit(indices))
}

pub fn bound(
    channel: &Path,
    subset_spec: &str,
    csv: bool,
    force: bool,
    cfg: OptimizerConfig,
) -> Result<i32, AppError> {
    let (ch, label) = ChannelFile::load(channel)?;
    let bounds: Vec<SubsetBound> = match parse_subset_spec(subset_spec)? {
        SubsetSpec::All => region_outer_bound(&ch, ch.k(), &cfg, force)?,
        SubsetSpec::Size(size) => bounds_for_size(&ch, size, &cfg, force)?,
        SubsetSpec::Explicit(one_based) => {
            let subset = OrderedSubset::from_one_based(&one_based, ch.k())?;
            let h_s = ch.submatrix(&subset)?;
            let result = optimize_subset(&h_s, ch.p(), ch.n(), &cfg, subset.clone())?;
            let mut indices: Vec<usize> = subset.indices().to_vec();
            indices.sort_unstable();
            vec![SubsetBound {
                indices,
                per_ordering: vec![(subset, result.value_bits)],
                best: result,
            }]
        }
    };
    if csv {
        println!("# {UNITS_HEADER}");
        println!("subset,ordering,value_bits,converged,best");
        for sb in &bounds {
            let subset_label: Vec<String> =
                sb.indices.iter().map(|&i| (i + 1).to_string()).collect();
            let subset_label = subset_label.join("+");
            for (ordering, value) in &sb.per_ordering {
                let ordering_label: Vec<String> =
                    ordering.indices().iter().map(|&i| (i + 1).to_string()).collect();
                let is_best = ordering == &sb.best.subset;
                println!(
                    "{subset_label},{},{},{},{}",
                    ordering_label.join("-"),
                    f17(*value),
                    if is_best { sb.best.converged as u8 } else { u8::from(false) },
                    u8::from(is_best)
                );
            }
        }
    } else {
        channel_banner("bound", &ch, &label);
        for sb in &bounds {
            let subset_label: Vec<String> =
                sb.indices.iter().map(|&i| (i + 1).to_string()).collect();
            println!(
                "subset {{{}}}: bound {}  via ordering {}{}",
                subset_label.join(","),
                f17(sb.best.value_bits),
                sb.best.subset,
                if sb.best.converged { "" } else { "  [not converged]" }
            );
            if sb.per_ordering.len() > 1 {
                for (ordering, value) in &sb.per_ordering {
                    println!("  ordering {ordering}: {}", f17(*value));
                }
            }
        }
    }
    Ok(0)
}

pub fn sweep(
    users: usize,
    count: usize,
    kind: &str,
    gain_max: f64,
    cfg: OptimizerConfig,
) -> Result<i32, AppError> {
    if users == 0 {
        return Err(AppError::Usage("--users must be at least 1".into()));
    }
    if users > 8 {
        return Err(AppError::Usage(format!(
            "--users {users} exceeds the enumeration guard (K <= 8)"
        )));
    }
    if !gain_max.is_finite() || gain_max <= 0.0 {
        return Err(AppError::Usage(format!("invalid --gain-max {gain_max}")));
    }
    let degraded = match kind {
        "degraded" => true,
        "general" => false,
        other => return Err(AppError::Usage(format!("unknown ensemble kind {other:?}"))),
    };
    println!("# {UNITS_HEADER}");
    println!("index,kind,k,seed,digest,achievable_sum_bits,theorem2_bits,fstar_bits,gap_bits");
    // Rows are independent and individually seeded; parallel evaluation
    // cannot change the output order or contents.
    let rows: Vec<String> = (0..count)
        .into_par_iter()
        .map(|index| {
            let row_seed = cfg
                .seed
                .wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(index as u64 + 1));
            let mut rng = ChaCha8Rng::seed_from_u64(row_seed);
            let row_cfg = OptimizerConfig {
                seed: row_seed,
                ..cfg.clone()
            };
            if degraded {
                let dc = ensemble::sample_degraded(&mut rng, users, gain_max, 0.0, 1.0, 1.0);
                let digest = digest_degraded(&dc);
                let achievable = sic_sum_rate(&dc).sum;
                let theorem2 = degraded_sum_capacity(&dc);
                let fstar = optimize_fstar(&dc.canonical_h(), 1.0, 1.0, &row_cfg)
                    .expect("sampled channel is well-formed")
                    .value_bits;
                format!(
                    "{index},degraded,{users},{},{digest},{},{},{},{}",
                    row_seed,
                    f17(achievable),
                    f17(theorem2),
                    f17(fstar),
                    f17(fstar - theorem2)
                )
            } else {
                let ch = ensemble::sample_general(&mut rng, users, gain_max, 1.0, 1.0);
                let digest = digest_general(&ch);
                let fstar = optimize_fstar(ch.h(), 1.0, 1.0, &row_cfg)
                    .expect("sampled channel is well-formed")
                    .value_bits;
                format!(
                    "{index},general,{users},{},{digest},,,{},",
                    row_seed,
                    f17(fstar)
                )
            }
        })
        .collect();
    for row in rows {
        println!("{row}");
    }
    Ok(0)
}

fn digest_degraded(dc: &DegradedChannel) -> String {
    let mut hasher = Sha256::new();
    for x in dc.a().iter().chain(dc.b().iter()) {
        hasher.update(f17(*x).as_bytes());
        hasher.update(b";");
    }
    short_hex(hasher)
}

fn digest_general(ch: &ChannelInstance) -> String {
    let mut hasher = Sha256::new();
    for i in 0..ch.k() {
        for j in 0..ch.k() {
            hasher.update(f17(ch.h()[(i, j)]).as_bytes());
            hasher.update(b";");
        }
    }
    short_hex(hasher)
}

fn short_hex(hasher: Sha256) -> String {
    let digest = hasher.finalize();
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}
