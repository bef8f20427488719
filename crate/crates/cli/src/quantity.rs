//! Output quantity catalogue. Names are the stable `quantity` column values.

use std::str::FromStr;

use qfluct_core::Protocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// `C_L1` of the initial state, emitted once at `t_i`.
    CoherenceL1,
    Mean(Protocol),
    SecondMoment(Protocol),
    Entropy(Protocol),
    /// Full joint table, one row per cell named `p_<protocol>_<l>_<k>`.
    Joint(Protocol),
    /// EPM entropy of the dephased initial state.
    EntropyEpmDephased,
    RelCohSecondMoment,
    RelCohSecondMomentMinCl1,
    RelCohSecondMomentMaxCl1,
    SecondMomentCoherence,
    SecondMomentPopulation,
    EntropyEpmMinusTpm,
    EntropyEpmDephasedMinusTpm,
    EntropyEpmMinusMll,
    SecondMomentMllMinusEpm,
    MutualInformationMllEpm,
    TvEpmTpm,
    TvEpmMll,
    TvMllTpm,
    /// `⟨e^{-β(ΔE - ΔF)}⟩_EPM` at `beta_reference`.
    JarzynskiLhs,
    FluctuationRatioMeasured,
    FluctuationRatioPredicted,
}

const EPM: &[Protocol] = &[Protocol::Epm];
const EPM_TPM: &[Protocol] = &[Protocol::Epm, Protocol::Tpm];
const EPM_MLL: &[Protocol] = &[Protocol::Epm, Protocol::Mll];
const MLL_TPM: &[Protocol] = &[Protocol::Mll, Protocol::Tpm];

fn protocol_slice(p: Protocol) -> &'static [Protocol] {
    match p {
        Protocol::Epm => &[Protocol::Epm],
        Protocol::Tpm => &[Protocol::Tpm],
        Protocol::Mll => &[Protocol::Mll],
    }
}

impl Quantity {
    pub fn catalogue() -> Vec<Quantity> {
        use Quantity::*;
        let mut all = vec![CoherenceL1];
        for p in Protocol::ALL {
            all.extend([Mean(p), SecondMoment(p), Entropy(p), Joint(p)]);
        }
        all.extend([
            EntropyEpmDephased,
            RelCohSecondMoment,
            RelCohSecondMomentMinCl1,
            RelCohSecondMomentMaxCl1,
            SecondMomentCoherence,
            SecondMomentPopulation,
            EntropyEpmMinusTpm,
            EntropyEpmDephasedMinusTpm,
            EntropyEpmMinusMll,
            SecondMomentMllMinusEpm,
            MutualInformationMllEpm,
            TvEpmTpm,
            TvEpmMll,
            TvMllTpm,
            JarzynskiLhs,
            FluctuationRatioMeasured,
            FluctuationRatioPredicted,
        ]);
        all
    }

    pub fn name(self) -> &'static str {
        use Quantity::*;
        match self {
            CoherenceL1 => "coherence_l1",
            Mean(Protocol::Epm) => "mean_epm",
            Mean(Protocol::Tpm) => "mean_tpm",
            Mean(Protocol::Mll) => "mean_mll",
            SecondMoment(Protocol::Epm) => "second_moment_epm",
            SecondMoment(Protocol::Tpm) => "second_moment_tpm",
            SecondMoment(Protocol::Mll) => "second_moment_mll",
            Entropy(Protocol::Epm) => "entropy_epm",
            Entropy(Protocol::Tpm) => "entropy_tpm",
            Entropy(Protocol::Mll) => "entropy_mll",
            Joint(Protocol::Epm) => "joint_epm",
            Joint(Protocol::Tpm) => "joint_tpm",
            Joint(Protocol::Mll) => "joint_mll",
            EntropyEpmDephased => "entropy_epm_dephased",
            RelCohSecondMoment => "rel_coh_second_moment",
            RelCohSecondMomentMinCl1 => "rel_coh_second_moment_min_cl1",
            RelCohSecondMomentMaxCl1 => "rel_coh_second_moment_max_cl1",
            SecondMomentCoherence => "second_moment_coherence",
            SecondMomentPopulation => "second_moment_population",
            EntropyEpmMinusTpm => "entropy_epm_minus_tpm",
            EntropyEpmDephasedMinusTpm => "entropy_epm_dephased_minus_tpm",
            EntropyEpmMinusMll => "entropy_epm_minus_mll",
            SecondMomentMllMinusEpm => "second_moment_mll_minus_epm",
            MutualInformationMllEpm => "mutual_information_mll_epm",
            TvEpmTpm => "tv_epm_tpm",
            TvEpmMll => "tv_epm_mll",
            TvMllTpm => "tv_mll_tpm",
            JarzynskiLhs => "jarzynski_lhs",
            FluctuationRatioMeasured => "fluctuation_ratio_measured",
            FluctuationRatioPredicted => "fluctuation_ratio_predicted",
        }
    }

    pub fn description(self) -> &'static str {
        use Quantity::*;
        match self {
            CoherenceL1 => "l1 coherence of the initial state (emitted at t_i)",
            Mean(_) => "mean energy change",
            SecondMoment(_) => "second moment of the energy change",
            Entropy(_) => "Shannon entropy of the joint distribution (nats)",
            Joint(_) => "joint distribution cells, rows p_<protocol>_<l>_<k>",
            EntropyEpmDephased => "EPM entropy for the dephased initial state",
            RelCohSecondMoment => "coherence share of the EPM second moment",
            RelCohSecondMomentMinCl1 => "rel_coh_second_moment of the least coherent state",
            RelCohSecondMomentMaxCl1 => "rel_coh_second_moment of the most coherent state",
            SecondMomentCoherence => "coherence term of the EPM second moment",
            SecondMomentPopulation => "population term of the EPM second moment",
            EntropyEpmMinusTpm => "EPM minus TPM entropy",
            EntropyEpmDephasedMinusTpm => "dephased-state EPM minus TPM entropy",
            EntropyEpmMinusMll => "EPM minus MLL entropy",
            SecondMomentMllMinusEpm => "MLL minus EPM second moment",
            MutualInformationMllEpm => "relative entropy of the MLL table to the EPM table",
            TvEpmTpm | TvEpmMll | TvMllTpm => "total variation distance of the energy-change distributions",
            JarzynskiLhs => "EPM average of exp(-beta (dE - dF)) at beta_reference",
            FluctuationRatioMeasured => "G(i beta) / G_TPM(i beta) from the distributions",
            FluctuationRatioPredicted => "G(i beta) / G_TPM(i beta) from thermal traces",
        }
    }

    /// Protocols whose joint tables this quantity reads.
    pub fn protocols(self) -> &'static [Protocol] {
        use Quantity::*;
        match self {
            CoherenceL1 => &[],
            Mean(p) | SecondMoment(p) | Entropy(p) | Joint(p) => protocol_slice(p),
            EntropyEpmDephased
            | RelCohSecondMoment
            | RelCohSecondMomentMinCl1
            | RelCohSecondMomentMaxCl1
            | SecondMomentCoherence
            | SecondMomentPopulation
            | JarzynskiLhs => EPM,
            EntropyEpmMinusTpm
            | EntropyEpmDephasedMinusTpm
            | TvEpmTpm
            | FluctuationRatioMeasured
            | FluctuationRatioPredicted => EPM_TPM,
            EntropyEpmMinusMll | SecondMomentMllMinusEpm | MutualInformationMllEpm | TvEpmMll => {
                EPM_MLL
            }
            TvMllTpm => MLL_TPM,
        }
    }

    pub fn needs_beta(self) -> bool {
        matches!(
            self,
            Quantity::JarzynskiLhs
                | Quantity::FluctuationRatioMeasured
                | Quantity::FluctuationRatioPredicted
        )
    }

    /// Emitted once at `t_i` rather than at every snapshot.
    pub fn is_initial(self) -> bool {
        self == Quantity::CoherenceL1
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Quantity::catalogue()
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| format!("unknown quantity `{s}` (see `qfluct list-experiments`)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip_and_are_unique() {
        let all = Quantity::catalogue();
        let mut names: Vec<&str> = all.iter().map(|q| q.name()).collect();
        for q in &all {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), *q);
        }
        names.sort();
        names.dedup();
        assert_eq!(names.len(), all.len());
    }

    #[test]
    fn names_are_snake_case() {
        for q in Quantity::catalogue() {
            assert!(q
                .name()
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'));
        }
    }
}
