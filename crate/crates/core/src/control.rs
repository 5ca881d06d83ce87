//! Control-packet budgets and reliability.
//!
//! Every paradigm exchanges four control packets: SET-U and ACK-U with the UE,
//! SET-R and ACK-R with the RIS controller. A packet is lost when the
//! exponential control-channel SNR cannot carry its bits within its useful
//! time, so with spectral load `L = b / (τ B)` the outage probability is
//! `1 − exp(−(2^L − 1)/λ)`.

use std::fmt;
use std::time::Duration;

use rand::Rng;

use crate::codebook::{conf_bits_floor, conf_bits_required};
use crate::error::{Error, Result};
use crate::scenario::{sample_cc_snr, RadioParams};
use crate::timing::{CcKind, FrameParams, Paradigm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Packet {
    SetU,
    SetR,
    AckU,
    AckR,
}

impl Packet {
    pub const ALL: [Packet; 4] = [Packet::SetU, Packet::SetR, Packet::AckU, Packet::AckR];

    pub fn destination(self) -> Destination {
        match self {
            Packet::SetU | Packet::AckU => Destination::Ue,
            Packet::SetR | Packet::AckR => Destination::Risc,
        }
    }
}

impl fmt::Display for Packet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Packet::SetU => "SET-U",
            Packet::SetR => "SET-R",
            Packet::AckU => "ACK-U",
            Packet::AckR => "ACK-R",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Destination {
    Ue,
    Risc,
}

/// Field widths of the control packets, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitFields {
    pub b_id: u64,
    pub b_frame: u64,
    pub b_guard: u64,
    pub b_conf: u64,
    pub b_se: u64,
    pub b_quant: u64,
}

impl Default for BitFields {
    fn default() -> Self {
        Self {
            b_id: 8,
            b_frame: 16,
            b_guard: 16,
            b_conf: 8,
            b_se: 6,
            b_quant: 2,
        }
    }
}

impl BitFields {
    /// Checks that `b_conf` can index a common codebook of `cardinality` entries.
    ///
    /// Returns a warning when `b_conf` equals `⌊log₂ C⌋` but falls short of
    /// `⌈log₂ C⌉`; anything narrower is rejected.
    pub fn check_conf_width(&self, cardinality: usize) -> Result<Option<String>> {
        let need = conf_bits_required(cardinality) as u64;
        if self.b_conf >= need {
            return Ok(None);
        }
        if self.b_conf == conf_bits_floor(cardinality) as u64 {
            return Ok(Some(format!(
                "b_conf = {} matches floor(log2 {cardinality}) but cannot address all \
                 {cardinality} configurations (needs {need})",
                self.b_conf
            )));
        }
        Err(Error::Config(format!(
            "b_conf = {} cannot index {cardinality} configurations (needs {need})",
            self.b_conf
        )))
    }
}

/// Informative bits of one control packet (preamble `b_ID + 1` included).
pub fn packet_bits(
    paradigm: Paradigm,
    packet: Packet,
    fields: &BitFields,
    n_elements: usize,
    cardinality: usize,
) -> u64 {
    let preamble = fields.b_id + 1;
    let payload = match (paradigm.is_bsw(), packet) {
        (_, Packet::SetU) => fields.b_frame + fields.b_guard + fields.b_conf,
        (_, Packet::SetR) => fields.b_frame + cardinality as u64 * fields.b_conf,
        (false, Packet::AckU) => fields.b_se,
        (false, Packet::AckR) => n_elements as u64 * fields.b_quant,
        (true, Packet::AckU) => 0,
        (true, Packet::AckR) => fields.b_conf,
    };
    preamble + payload
}

/// Portion of the packet's TTI usable for informative bits.
///
/// SET-U always loses the switching guard; ACK-U does too under beam sweeping
/// but not under OCE, where the optimization TTIs (`A ≥ 1`) absorb the switch.
pub fn useful_time(
    paradigm: Paradigm,
    packet: Packet,
    tti: Duration,
    guard: Duration,
    opt_ttis: u32,
) -> Result<Duration> {
    if guard >= tti {
        return Err(Error::Config("tau_s must be < T".into()));
    }
    Ok(match packet {
        Packet::SetU => tti - guard,
        Packet::AckU if paradigm.is_bsw() => tti - guard,
        Packet::AckU => {
            if opt_ttis == 0 {
                return Err(Error::Contract(
                    "OCE ACK-U skips the guard only when A >= 1".into(),
                ));
            }
            tti
        }
        Packet::SetR | Packet::AckR => tti,
    })
}

/// `1 − exp(−(2^{b/(τB)} − 1)/λ)`; an infinite `λ` gives 0.
pub fn packet_outage(bits: u64, useful_time_s: f64, bandwidth_hz: f64, lambda: f64) -> Result<f64> {
    let threshold = snr_threshold(bits, useful_time_s, bandwidth_hz)?;
    check_lambda(lambda)?;
    if lambda.is_infinite() {
        return Ok(0.0);
    }
    Ok(-(-threshold / lambda).exp_m1())
}

/// Minimum SNR `2^{b/(τB)} − 1` that carries `bits` in `useful_time_s` over `bandwidth_hz`.
pub fn snr_threshold(bits: u64, useful_time_s: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(useful_time_s > 0.0 && useful_time_s.is_finite()) {
        return Err(Error::Domain(format!(
            "useful time must be positive, got {useful_time_s}"
        )));
    }
    if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
        return Err(Error::Domain(format!(
            "bandwidth must be positive, got {bandwidth_hz}"
        )));
    }
    let load = bits as f64 / (useful_time_s * bandwidth_hz);
    Ok(load.exp2() - 1.0)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::Domain(format!(
            "mean SNR must be positive, got {lambda}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketBudget {
    pub packet: Packet,
    pub bits: u64,
    pub useful_time_s: f64,
    pub bandwidth_hz: f64,
    pub destination: Destination,
}

impl PacketBudget {
    pub fn snr_threshold(&self) -> Result<f64> {
        snr_threshold(self.bits, self.useful_time_s, self.bandwidth_hz)
    }

    pub fn outage(&self, lambda: f64) -> Result<f64> {
        packet_outage(self.bits, self.useful_time_s, self.bandwidth_hz, lambda)
    }
}

/// SET-U, SET-R, ACK-U, ACK-R budgets for a paradigm.
///
/// `cardinality` is the size of the codebook the RIS controller sweeps
/// (carried in SET-R).
pub fn packet_budgets(
    paradigm: Paradigm,
    fields: &BitFields,
    n_elements: usize,
    cardinality: usize,
    frame: &FrameParams,
    radio: &RadioParams,
) -> Result<[PacketBudget; 4]> {
    let mut out = Vec::with_capacity(4);
    for packet in Packet::ALL {
        let destination = packet.destination();
        out.push(PacketBudget {
            packet,
            bits: packet_bits(paradigm, packet, fields, n_elements, cardinality),
            useful_time_s: useful_time(paradigm, packet, frame.tti, frame.guard, frame.opt_ttis)?
                .as_secs_f64(),
            bandwidth_hz: match destination {
                Destination::Ue => radio.bandwidth_cc_ue_hz,
                Destination::Risc => radio.bandwidth_cc_ris_hz,
            },
            destination,
        });
    }
    Ok(out.try_into().expect("four packets"))
}

fn split_budgets(budgets: &[PacketBudget]) -> Result<(Vec<&PacketBudget>, Vec<&PacketBudget>)> {
    if budgets.len() != 4 {
        return Err(Error::Contract(format!(
            "expected 4 control packets, got {}",
            budgets.len()
        )));
    }
    if let Some(missing) = Packet::ALL
        .iter()
        .find(|p| !budgets.iter().any(|b| b.packet == **p))
    {
        return Err(Error::Contract(format!("missing {missing} packet")));
    }
    let (ue, ris): (Vec<_>, Vec<_>) = budgets
        .iter()
        .partition(|b| b.destination == Destination::Ue);
    if ue.len() != 2 || ris.len() != 2 {
        return Err(Error::Contract("expected 2 UE and 2 RISC packets".into()));
    }
    Ok((ue, ris))
}

/// `Σ_i 2^{b_i/(τ_i B)} − 2` over one destination's packets.
pub fn excess_load<'a>(budgets: impl IntoIterator<Item = &'a PacketBudget>) -> Result<f64> {
    budgets.into_iter().map(|b| b.snr_threshold()).sum()
}

fn reliability_factor(excess: f64, lambda: f64) -> f64 {
    if lambda.is_infinite() {
        1.0
    } else {
        (-excess / lambda).exp()
    }
}

/// Closed-form probability that all four packets arrive.
///
/// Under out-of-band control the RIS link is error free regardless of `lambda_r`.
pub fn correct_control_prob(
    cc: CcKind,
    budgets: &[PacketBudget],
    lambda_u: f64,
    lambda_r: f64,
) -> Result<f64> {
    let (ue, ris) = split_budgets(budgets)?;
    check_lambda(lambda_u)?;
    let ue_factor = reliability_factor(excess_load(ue)?, lambda_u);
    let ris_factor = match cc {
        CcKind::Obcc => 1.0,
        CcKind::Ibcc => {
            check_lambda(lambda_r)?;
            reliability_factor(excess_load(ris)?, lambda_r)
        }
    };
    Ok(ue_factor * ris_factor)
}

/// Product of per-packet success probabilities; algebraically equal to
/// [`correct_control_prob`].
pub fn correct_control_prob_product(
    cc: CcKind,
    budgets: &[PacketBudget],
    lambda_u: f64,
    lambda_r: f64,
) -> Result<f64> {
    split_budgets(budgets)?;
    budgets.iter().try_fold(1.0, |acc, b| {
        let lambda = match (b.destination, cc) {
            (Destination::Ue, _) => lambda_u,
            (Destination::Risc, CcKind::Obcc) => f64::INFINITY,
            (Destination::Risc, CcKind::Ibcc) => lambda_r,
        };
        Ok(acc * (1.0 - b.outage(lambda)?))
    })
}

/// Draws one exponential SNR per packet and reports whether all four clear their thresholds.
pub fn sample_control_success<R: Rng + ?Sized>(
    rng: &mut R,
    cc: CcKind,
    budgets: &[PacketBudget],
    lambda_u: f64,
    lambda_r: f64,
) -> Result<bool> {
    split_budgets(budgets)?;
    let mut ok = true;
    // all four draws are always taken so the stream position does not depend on outcomes
    for b in budgets {
        let lambda = match (b.destination, cc) {
            (Destination::Ue, _) => lambda_u,
            (Destination::Risc, CcKind::Obcc) => f64::INFINITY,
            (Destination::Risc, CcKind::Ibcc) => lambda_r,
        };
        let snr = sample_cc_snr(rng, lambda)?;
        ok &= snr > b.snr_threshold()?;
    }
    Ok(ok)
}

fn check_target(target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain(format!(
            "target probability must be in (0, 1), got {target}"
        )));
    }
    Ok(-target.ln())
}

/// Smallest `λ_u` meeting `target` with an error-free RIS link: `S_u / (−ln target)`.
pub fn min_lambda_obcc(target: f64, ue_budgets: &[PacketBudget]) -> Result<f64> {
    let log_target = check_target(target)?;
    let excess = excess_load(ue_budgets)?;
    if excess <= 0.0 {
        return Ok(0.0);
    }
    Ok(excess / log_target)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierPoint {
    pub lambda_u: f64,
    /// Smallest `λ_r` meeting the target, or `None` when no `λ_r` suffices.
    pub lambda_r_min: Option<f64>,
}

/// Minimum `λ_r` meeting `target` at each `λ_u`: `S_r / (−ln target − S_u/λ_u)`.
pub fn reliability_frontier(
    target: f64,
    ue_budgets: &[PacketBudget],
    ris_budgets: &[PacketBudget],
    lambda_u_grid: &[f64],
) -> Result<Vec<FrontierPoint>> {
    let log_target = check_target(target)?;
    let s_u = excess_load(ue_budgets)?;
    let s_r = excess_load(ris_budgets)?;
    lambda_u_grid
        .iter()
        .map(|&lambda_u| {
            check_lambda(lambda_u)?;
            let ue_term = if lambda_u.is_infinite() {
                0.0
            } else {
                s_u / lambda_u
            };
            let denom = log_target - ue_term;
            let lambda_r_min = if denom > 0.0 {
                Some(if s_r <= 0.0 { 0.0 } else { s_r / denom })
            } else {
                None
            };
            Ok(FrontierPoint {
                lambda_u,
                lambda_r_min,
            })
        })
        .collect()
}

/// UE-bound and RISC-bound budgets, in packet order.
pub fn by_destination(budgets: &[PacketBudget]) -> (Vec<PacketBudget>, Vec<PacketBudget>) {
    budgets
        .iter()
        .partition(|b| b.destination == Destination::Ue)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::linear_to_db;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const T: Duration = Duration::from_micros(500);
    const GUARD: Duration = Duration::from_micros(50);

    fn budgets(paradigm: Paradigm, cardinality: usize) -> [PacketBudget; 4] {
        packet_budgets(
            paradigm,
            &BitFields::default(),
            100,
            cardinality,
            &FrameParams::default(),
            &RadioParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn bit_counts() {
        let f = BitFields::default();
        assert_eq!(packet_bits(Paradigm::Oce, Packet::SetU, &f, 100, 100), 49);
        assert_eq!(packet_bits(Paradigm::Oce, Packet::SetR, &f, 100, 100), 825);
        assert_eq!(packet_bits(Paradigm::Oce, Packet::AckU, &f, 100, 100), 15);
        assert_eq!(packet_bits(Paradigm::Oce, Packet::AckR, &f, 100, 100), 209);
        assert_eq!(
            packet_bits(Paradigm::BswFixed, Packet::SetU, &f, 100, 34),
            49
        );
        assert_eq!(
            packet_bits(Paradigm::BswFixed, Packet::SetR, &f, 100, 34),
            297
        );
        assert_eq!(
            packet_bits(Paradigm::BswFixed, Packet::AckU, &f, 100, 34),
            9
        );
        assert_eq!(
            packet_bits(Paradigm::BswFixed, Packet::AckR, &f, 100, 34),
            17
        );
        assert_eq!(
            packet_bits(Paradigm::BswFlexible, Packet::SetR, &f, 100, 100),
            825
        );
    }

    #[test]
    fn useful_times() {
        let us = Duration::from_micros;
        assert_eq!(
            useful_time(Paradigm::Oce, Packet::SetU, T, GUARD, 5).unwrap(),
            us(450)
        );
        assert_eq!(
            useful_time(Paradigm::Oce, Packet::AckU, T, GUARD, 5).unwrap(),
            us(500)
        );
        assert_eq!(
            useful_time(Paradigm::BswFixed, Packet::AckU, T, GUARD, 5).unwrap(),
            us(450)
        );
        for p in Paradigm::ALL {
            assert_eq!(useful_time(p, Packet::AckR, T, GUARD, 5).unwrap(), us(500));
            assert_eq!(useful_time(p, Packet::SetR, T, GUARD, 5).unwrap(), us(500));
        }
        assert!(matches!(
            useful_time(Paradigm::Oce, Packet::AckU, T, GUARD, 0),
            Err(Error::Contract(_))
        ));
        assert!(useful_time(Paradigm::BswFixed, Packet::AckU, T, GUARD, 0).is_ok());
    }

    #[test]
    fn outage_cases() {
        assert_eq!(
            packet_outage(49, 450e-6, 900e3, f64::INFINITY).unwrap(),
            0.0
        );
        assert_eq!(packet_outage(0, 450e-6, 900e3, 3.0).unwrap(), 0.0);
        let p = packet_outage(49, 450e-6, 900e3, 11.03).unwrap();
        let threshold = (49.0f64 / 405.0).exp2() - 1.0;
        assert!((threshold - 0.087_48).abs() < 1e-4);
        assert!((p - (1.0 - (-threshold / 11.03).exp())).abs() < 1e-15);
        assert!((p - 7.90e-3).abs() < 1e-5);
        assert!(packet_outage(1, 0.0, 900e3, 1.0).is_err());
        assert!(packet_outage(1, 1e-3, -5.0, 1.0).is_err());
    }

    #[test]
    fn oce_obcc_reference_value() {
        let b = budgets(Paradigm::Oce, 100);
        let (ue, _) = by_destination(&b);
        let s_u = excess_load(&ue).unwrap();
        assert!((s_u - 0.110_853).abs() < 1e-6, "{s_u}");
        let pcc = correct_control_prob(CcKind::Obcc, &b, 11.03, 0.001).unwrap();
        assert!((pcc - (-0.110_853f64 / 11.03).exp()).abs() < 1e-7);
        assert!((pcc - 0.9900).abs() < 5e-5);
    }

    #[test]
    fn perfect_channels_give_certainty() {
        let b = budgets(Paradigm::Oce, 100);
        let p = correct_control_prob(CcKind::Ibcc, &b, f64::INFINITY, f64::INFINITY).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn wrong_packet_count_rejected() {
        let b = budgets(Paradigm::Oce, 100);
        assert!(matches!(
            correct_control_prob(CcKind::Obcc, &b[..3], 1.0, 1.0),
            Err(Error::Contract(_))
        ));
        let dup = [b[0], b[0], b[1], b[3]];
        assert!(matches!(
            correct_control_prob(CcKind::Obcc, &dup, 1.0, 1.0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn min_lambda_reference_values() {
        let oce = budgets(Paradigm::Oce, 100);
        let (ue, _) = by_destination(&oce);
        let l = min_lambda_obcc(0.99, &ue).unwrap();
        assert!((l - 11.03).abs() < 0.01, "{l}");
        assert!((linear_to_db(l) - 10.43).abs() < 0.01);

        let bsw = budgets(Paradigm::BswFixed, 34);
        let (ue, _) = by_destination(&bsw);
        let l = min_lambda_obcc(0.99, &ue).unwrap();
        assert!((l - 10.25).abs() < 0.01, "{l}");
        assert!((linear_to_db(l) - 10.11).abs() < 0.01);

        let (ue, _) = by_destination(&oce);
        assert!(min_lambda_obcc(1.0 - 1e-12, &ue).unwrap() > 1e9);
        assert!(min_lambda_obcc(1.0, &ue).is_err());
    }

    #[test]
    fn frontier_boundaries_and_ordering() {
        let oce = budgets(Paradigm::Oce, 100);
        let (ue, ris) = by_destination(&oce);
        let l_min = min_lambda_obcc(0.99, &ue).unwrap();
        let pts = reliability_frontier(0.99, &ue, &ris, &[l_min, f64::INFINITY, 1e12]).unwrap();
        assert_eq!(pts[0].lambda_r_min, None);
        let s_r = excess_load(&ris).unwrap();
        assert_eq!(pts[1].lambda_r_min, Some(s_r / -(0.99f64).ln()));
        assert!((pts[2].lambda_r_min.unwrap() / pts[1].lambda_r_min.unwrap() - 1.0).abs() < 1e-9);

        let bsw = budgets(Paradigm::BswFixed, 34);
        let (bue, bris) = by_destination(&bsw);
        assert_eq!(
            bris.iter().map(|b| b.bits).collect::<Vec<_>>(),
            vec![297, 17]
        );
        assert_eq!(
            ris.iter().map(|b| b.bits).collect::<Vec<_>>(),
            vec![825, 209]
        );
        let grid: Vec<f64> = (0..60)
            .map(|i| 10f64.powf((10.0 + 0.5 * i as f64) / 10.0))
            .collect();
        let a = reliability_frontier(0.99, &ue, &ris, &grid).unwrap();
        let b = reliability_frontier(0.99, &bue, &bris, &grid).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            if let Some(ra) = pa.lambda_r_min {
                assert!(ra > pb.lambda_r_min.unwrap());
            }
        }
    }

    #[test]
    fn frontier_points_meet_target_exactly() {
        let b = budgets(Paradigm::Oce, 100);
        let (ue, ris) = by_destination(&b);
        for p in reliability_frontier(0.99, &ue, &ris, &[20.0, 50.0, 300.0]).unwrap() {
            let lr = p.lambda_r_min.unwrap();
            let pcc = correct_control_prob(CcKind::Ibcc, &b, p.lambda_u, lr).unwrap();
            assert!((pcc - 0.99).abs() < 1e-12);
        }
    }

    #[test]
    fn conf_width_check() {
        let mut f = BitFields::default();
        assert_eq!(f.check_conf_width(100).unwrap(), None);
        f.b_conf = 6;
        assert!(f.check_conf_width(100).unwrap().is_some());
        f.b_conf = 5;
        assert!(f.check_conf_width(100).is_err());
    }

    #[test]
    fn monte_carlo_success_matches_closed_form() {
        let b = budgets(Paradigm::Oce, 100);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (lu, lr) = (3.0, 30.0);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| sample_control_success(&mut rng, CcKind::Ibcc, &b, lu, lr).unwrap())
            .count();
        let p = correct_control_prob(CcKind::Ibcc, &b, lu, lr).unwrap();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() < 3.0 * se);
    }

    proptest! {
        #[test]
        fn product_equals_closed_form(
            bits in prop::collection::vec(0u64..2000, 4),
            lu in 0.01f64..1e4,
            lr in 0.01f64..1e4,
            ibcc in any::<bool>(),
        ) {
            let mut b = budgets(Paradigm::Oce, 100);
            for (budget, bits) in b.iter_mut().zip(bits) {
                budget.bits = bits;
            }
            let cc = if ibcc { CcKind::Ibcc } else { CcKind::Obcc };
            let closed = correct_control_prob(cc, &b, lu, lr).unwrap();
            let product = correct_control_prob_product(cc, &b, lu, lr).unwrap();
            prop_assert!((closed - product).abs() <= 1e-12);
        }

        #[test]
        fn monotone_in_snr_and_bits(lu in 0.1f64..1e3, lr in 0.1f64..1e3, k in 1.0f64..10.0, extra in 1u64..100, which in 0usize..4) {
            let b = budgets(Paradigm::BswFixed, 34);
            let base = correct_control_prob(CcKind::Ibcc, &b, lu, lr).unwrap();
            prop_assert!(correct_control_prob(CcKind::Ibcc, &b, lu * k, lr).unwrap() >= base);
            prop_assert!(correct_control_prob(CcKind::Ibcc, &b, lu, lr * k).unwrap() >= base);
            let mut more = b;
            more[which].bits += extra;
            prop_assert!(correct_control_prob(CcKind::Ibcc, &more, lu, lr).unwrap() <= base);
        }

        #[test]
        fn outage_depends_on_spectral_load_only(bits in 1u64..1000, tau in 1e-5f64..1e-2, bw in 1e4f64..1e7, lambda in 0.1f64..100.0, alpha in 1u64..8) {
            let a = packet_outage(bits, tau, bw, lambda).unwrap();
            let b = packet_outage(bits * alpha, tau * alpha as f64, bw, lambda).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300) + 1e-15);
        }
    }
}
