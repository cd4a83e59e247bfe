//! Wall-clock benchmark drivers. Unlike scenarios these measure real time and
//! are not reproducible bit for bit.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;
use std::time::{Duration, Instant};

use handover_core::actors::{lea_init, rsm_init, rsu_init, Lea, ProtocolConfig, Rsm, Rsu, Vehicle};
use handover_core::ledger::Ledger;
use handover_core::wire::{AuthRequest, RegistrationEnvelope};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::scenario::DEFAULT_SEED;

/// Virtual clock origin for benchmark timestamps, in ms.
const CLOCK_BASE_MS: u64 = 1_000_000;

/// One LEA, one RSM, one RSU and `vehicles` registered vehicles.
pub struct Fixture {
    pub rng: ChaCha20Rng,
    pub ledger: Ledger,
    pub lea: Lea,
    pub rsm: Rsm,
    pub rsu: Rsu,
    pub vehicles: Vec<Vehicle>,
}

impl Fixture {
    pub fn new(seed: u64, vehicles: usize) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let config = ProtocolConfig::default();
        let (ledger, registrar, revoker) = Ledger::genesis();
        let mut lea = lea_init(ledger.clone(), registrar, config, &mut rng);
        let mut rsm = rsm_init(&lea, "rsm-1", revoker, 0);
        let rsu = rsu_init(&rsm, "rsu-1", config, &mut rng);
        let mut vs = Vec::with_capacity(vehicles);
        for i in 0..vehicles {
            let mut vn = Vehicle::new(format!("vn-{i}").into_bytes(), lea.params().clone(), config);
            let (env, pending) = vn.begin_registration(&mut rng);
            let RegistrationEnvelope::Request { c1 } = env else { unreachable!("begin_registration emits a request") };
            let reply = rsm.handle_registration(&c1, &mut lea, CLOCK_BASE_MS, &mut rng).expect("fixture registration");
            vn.finish_registration(pending, reply, &ledger, CLOCK_BASE_MS).expect("fixture registration");
            vs.push(vn);
        }
        rsm.sync_all();
        Self { rng, ledger, lea, rsm, rsu, vehicles: vs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseStats {
    pub phase: &'static str,
    pub samples: usize,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
}

impl PhaseStats {
    pub fn from_samples(phase: &'static str, samples: &[Duration]) -> Self {
        let mut ms: Vec<f64> = samples.iter().map(|d| d.as_secs_f64() * 1e3).collect();
        ms.sort_by(f64::total_cmp);
        let n = ms.len();
        let rank = |p: f64| if n == 0 { 0.0 } else { ms[((p * n as f64).ceil() as usize).clamp(1, n) - 1] };
        let mean_ms = if n == 0 { 0.0 } else { ms.iter().sum::<f64>() / n as f64 };
        Self { phase, samples: n, mean_ms, p50_ms: rank(0.50), p95_ms: rank(0.95) }
    }
}

/// Least-squares line `y = slope·x + intercept` with its coefficient of determination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn of(points: &[(f64, f64)]) -> Self {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss_res: f64 = points.iter().map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
        let ss_tot: f64 = points.iter().map(|(_, y)| (y - my).powi(2)).sum();
        let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
        Self { slope, intercept, r_squared }
    }
}

#[derive(Clone, Debug)]
pub struct LatencyConfig {
    pub samples: usize,
    pub warmup: usize,
    pub batch_sizes: Vec<usize>,
    /// Each batch is timed this many times and the fastest run kept.
    pub batch_repeats: usize,
    pub seed: u64,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        Self { samples: 500, warmup: 50, batch_sizes: vec![1, 10, 100, 1000], batch_repeats: 3, seed: DEFAULT_SEED }
    }
}

#[derive(Clone, Debug)]
pub struct LatencyReport {
    /// `vn_build`, `rsu_verify`, `vn_reply`, `rsu_ack`.
    pub phases: Vec<PhaseStats>,
    /// `(n, ms)` to verify `n` requests back to back.
    pub batch: Vec<(usize, f64)>,
    pub batch_fit: LinearFit,
    /// Requests whose `A` was not in the pool; zero unless the pool ran dry.
    pub inline_points: usize,
}

impl LatencyReport {
    pub fn phase(&self, name: &str) -> Option<&PhaseStats> {
        self.phases.iter().find(|p| p.phase == name)
    }

    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["phase", "samples", "mean_ms", "p50_ms", "p95_ms"])?;
        for p in &self.phases {
            w.write_record([
                p.phase.to_string(),
                p.samples.to_string(),
                format!("{:.6}", p.mean_ms),
                format!("{:.6}", p.p50_ms),
                format!("{:.6}", p.p95_ms),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_batch_csv(&self, mut out: impl Write) -> csv::Result<()> {
        writeln!(
            out,
            "# linear fit: slope_ms_per_request={:.6} intercept_ms={:.6} r_squared={:.6}",
            self.batch_fit.slope, self.batch_fit.intercept, self.batch_fit.r_squared
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n_requests", "total_ms"])?;
        for (n, ms) in &self.batch {
            w.write_record([n.to_string(), format!("{ms:.6}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

/// Per-phase timings of full handovers, plus verification cost of batches of
/// `n` requests. `A` comes from the pool, so request build excludes it.
pub fn bench_latency(cfg: &LatencyConfig) -> LatencyReport {
    let mut fx = Fixture::new(cfg.seed, 1);
    let total = cfg.samples + cfg.warmup;
    fx.vehicles[0].refill_pool(total, &mut fx.rng).expect("registered");
    let pk = *fx.rsu.pk_bytes();
    let mut now = CLOCK_BASE_MS;
    let mut phases: [Vec<Duration>; 4] = Default::default();
    let mut inline_points = 0;
    for i in 0..total {
        now += 1;
        let Fixture { rng, rsu, vehicles, .. } = &mut fx;
        let vn = &mut vehicles[0];
        let ((req, session), t_build) = timed(|| vn.start_handover(&pk, now, rng).expect("registered"));
        let ((sid, rep), t_verify) = timed(|| rsu.handle_request(&req, now, rng).expect("honest request"));
        let (out, t_reply) = timed(|| vn.handle_reply(&session, &rep, now).expect("honest reply"));
        let (_, t_ack) = timed(|| rsu.handle_ack(sid, &out.ack).expect("honest ack"));
        if i >= cfg.warmup {
            inline_points += usize::from(session.inline_point);
            for (bucket, t) in phases.iter_mut().zip([t_build, t_verify, t_reply, t_ack]) {
                bucket.push(t);
            }
        }
    }
    fx.rsu.forget_sessions();
    let names = ["vn_build", "rsu_verify", "vn_reply", "rsu_ack"];
    let phases = names.iter().zip(&phases).map(|(n, s)| PhaseStats::from_samples(n, s)).collect();

    let max_n = cfg.batch_sizes.iter().copied().max().unwrap_or(0);
    now += 1;
    fx.vehicles[0].refill_pool(max_n, &mut fx.rng).expect("registered");
    let reqs: Vec<AuthRequest> =
        (0..max_n).map(|_| fx.vehicles[0].start_handover(&pk, now, &mut fx.rng).expect("registered").0).collect();
    let mut batch = Vec::new();
    for &n in &cfg.batch_sizes {
        let best = (0..cfg.batch_repeats.max(1))
            .map(|_| {
                timed(|| {
                    for r in &reqs[..n] {
                        fx.rsu.verify_request(r, now, &mut fx.rng).expect("honest request");
                    }
                })
                .1
            })
            .min()
            .expect("at least one repeat");
        batch.push((n, best.as_secs_f64() * 1e3));
    }
    let pts: Vec<(f64, f64)> = batch.iter().map(|&(n, ms)| (n as f64, ms)).collect();
    LatencyReport { phases, batch, batch_fit: LinearFit::of(&pts), inline_points }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub rate_per_s: u32,
    pub duration_ms: u64,
    /// Loss accounting window.
    pub interval_ms: u64,
    pub workers: usize,
    /// Requests verified before timing starts.
    pub warmup: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            rate_per_s: 5000,
            duration_ms: 1000,
            interval_ms: 1000,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            warmup: 50,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossRow {
    pub offered_rps: u32,
    pub duration_ms: u64,
    pub interval_ms: u64,
    pub workers: usize,
    pub offered: usize,
    pub served: usize,
    /// Still unserved when their interval closed.
    pub dropped: usize,
    /// Verified in time but rejected; always zero for honest load.
    pub rejected: usize,
}

impl LossRow {
    pub fn loss_ratio(&self) -> f64 {
        if self.offered == 0 {
            0.0
        } else {
            (self.dropped + self.rejected) as f64 / self.offered as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct LossReport {
    pub rows: Vec<LossRow>,
    pub workers: usize,
    /// Single-thread mean of verification plus commit.
    pub verify_mean_ms: f64,
    /// `workers / verify_mean`.
    pub capacity_rps: f64,
}

pub const LOSS_MODEL: &str = "a request arrives at offset i/rate; workers take requests in arrival order; \
a request is dropped when it is still unserved at the close of its interval";

impl LossReport {
    pub fn write_csv(&self, mut out: impl Write) -> csv::Result<()> {
        writeln!(out, "# loss model: {LOSS_MODEL}")?;
        writeln!(
            out,
            "# workers={} rsu_verify_mean_ms={:.6} measured_capacity_req_per_s={:.0}",
            self.workers, self.verify_mean_ms, self.capacity_rps
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "offered_req_per_s",
            "duration_ms",
            "interval_ms",
            "workers",
            "offered",
            "served",
            "dropped",
            "rejected",
            "loss_ratio",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.offered_rps.to_string(),
                r.duration_ms.to_string(),
                r.interval_ms.to_string(),
                r.workers.to_string(),
                r.offered.to_string(),
                r.served.to_string(),
                r.dropped.to_string(),
                r.rejected.to_string(),
                format!("{:.6}", r.loss_ratio()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean single-thread cost of verifying and committing one honest request.
pub fn measure_verify_ms(seed: u64, samples: usize) -> f64 {
    let mut fx = Fixture::new(seed, 1);
    let pk = *fx.rsu.pk_bytes();
    fx.vehicles[0].refill_pool(samples, &mut fx.rng).expect("registered");
    let reqs: Vec<AuthRequest> = (0..samples as u64)
        .map(|i| fx.vehicles[0].start_handover(&pk, CLOCK_BASE_MS + i, &mut fx.rng).expect("registered").0)
        .collect();
    let mut total = Duration::ZERO;
    for (i, r) in reqs.iter().enumerate() {
        let now = CLOCK_BASE_MS + i as u64;
        let (res, t) = timed(|| {
            let v = fx.rsu.verify_request(r, now, &mut fx.rng)?;
            fx.rsu.commit(v, now)
        });
        res.expect("honest request");
        total += t;
    }
    total.as_secs_f64() * 1e3 / samples.max(1) as f64
}

fn wait_until(deadline: Instant) {
    loop {
        let now = Instant::now();
        if now >= deadline {
            return;
        }
        let left = deadline - now;
        if left > Duration::from_millis(2) {
            std::thread::sleep(left - Duration::from_millis(1));
        } else {
            std::thread::yield_now();
        }
    }
}

/// Offers `rate·duration` requests in real time to one RSU served by a worker pool.
pub fn bench_loss_ratio(cfg: &BenchConfig) -> LossRow {
    let workers = cfg.workers.max(1);
    let offered = (cfg.rate_per_s as u64 * cfg.duration_ms / 1000) as usize;
    let gap_ms = 1000.0 / f64::from(cfg.rate_per_s.max(1));
    // Enough vehicles that one vehicle's consecutive requests differ in T1.
    let n_vehicles = (cfg.rate_per_s as usize / 500 + 1).min(offered.max(1));
    let mut fx = Fixture::new(cfg.seed, n_vehicles);
    let pk = *fx.rsu.pk_bytes();
    let per_vehicle = offered.div_ceil(n_vehicles);
    for v in &mut fx.vehicles {
        v.refill_pool(per_vehicle + cfg.warmup, &mut fx.rng).expect("registered");
    }
    let offsets: Vec<f64> = (0..offered).map(|i| i as f64 * gap_ms).collect();
    let reqs: Vec<AuthRequest> = offsets
        .iter()
        .enumerate()
        .map(|(i, off)| {
            let t1 = CLOCK_BASE_MS + *off as u64;
            fx.vehicles[i % n_vehicles].start_handover(&pk, t1, &mut fx.rng).expect("registered").0
        })
        .collect();

    // Warm caches with requests well before the measured window.
    let warm_ms = CLOCK_BASE_MS - 10_000;
    for i in 0..cfg.warmup {
        let (req, _) = fx.vehicles[0].start_handover(&pk, warm_ms + i as u64, &mut fx.rng).expect("registered");
        let _ = fx.rsu.handle_request(&req, warm_ms + i as u64, &mut fx.rng);
    }

    let rsu = RwLock::new(fx.rsu);
    let next = AtomicUsize::new(0);
    let served = AtomicUsize::new(0);
    let dropped = AtomicUsize::new(0);
    let rejected = AtomicUsize::new(0);
    let start = Instant::now() + Duration::from_millis(5);
    let interval = cfg.interval_ms.max(1) as f64;
    std::thread::scope(|s| {
        for w in 0..workers {
            let (rsu, next, served, dropped, rejected, reqs, offsets) =
                (&rsu, &next, &served, &dropped, &rejected, &reqs, &offsets);
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ (w as u64 + 1));
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= reqs.len() {
                    break;
                }
                let off = offsets[i];
                let close = start + Duration::from_secs_f64(((off / interval).floor() + 1.0) * interval / 1e3);
                wait_until(start + Duration::from_secs_f64(off / 1e3));
                if Instant::now() >= close {
                    dropped.fetch_add(1, Ordering::Relaxed);
                    continue;
                }
                let now_ms = CLOCK_BASE_MS + start.elapsed().as_millis() as u64;
                let verified = rsu.read().expect("rsu lock").verify_request(&reqs[i], now_ms, &mut rng);
                let res = verified.and_then(|v| rsu.write().expect("rsu lock").commit(v, now_ms));
                let counter = match res {
                    Err(_) => rejected,
                    Ok(_) if Instant::now() > close => dropped,
                    Ok(_) => served,
                };
                counter.fetch_add(1, Ordering::Relaxed);
            });
        }
    });
    LossRow {
        offered_rps: cfg.rate_per_s,
        duration_ms: cfg.duration_ms,
        interval_ms: cfg.interval_ms,
        workers,
        offered,
        served: served.into_inner(),
        dropped: dropped.into_inner(),
        rejected: rejected.into_inner(),
    }
}

/// One row per offered rate, with the measured capacity in the report header.
pub fn bench_loss_series(rates: &[u32], base: &BenchConfig) -> LossReport {
    let verify_mean_ms = measure_verify_ms(base.seed, 200);
    let workers = base.workers.max(1);
    let rows = rates.iter().map(|&r| bench_loss_ratio(&BenchConfig { rate_per_s: r, ..base.clone() })).collect();
    LossReport { rows, workers, verify_mean_ms, capacity_rps: workers as f64 * 1e3 / verify_mean_ms }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_of_exact_line() {
        let f = LinearFit::of(&[(1.0, 3.0), (2.0, 5.0), (4.0, 9.0)]);
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nearest_rank_percentiles() {
        let d: Vec<Duration> = (1..=100).map(Duration::from_millis).collect();
        let s = PhaseStats::from_samples("x", &d);
        assert_eq!((s.p50_ms, s.p95_ms), (50.0, 95.0));
        assert!((s.mean_ms - 50.5).abs() < 1e-9);
    }

    #[test]
    fn light_load_loses_nothing() {
        let row = bench_loss_ratio(&BenchConfig { rate_per_s: 100, duration_ms: 300, interval_ms: 100, workers: 1, warmup: 5, seed: 1 });
        assert_eq!(row.offered, 30);
        assert_eq!(row.rejected, 0);
        assert_eq!(row.served + row.dropped, 30);
        assert_eq!(row.loss_ratio(), 0.0, "{row:?}");
    }
}
