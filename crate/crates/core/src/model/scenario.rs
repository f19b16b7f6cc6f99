use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{CryptoProfile, NodeRole, NodeSpec, Registry};
use crate::adversary::AdversaryConfig;
use crate::error::{Error, Result, Violation};
use crate::timing::HopTiming;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    SingleHop,
    ParallelChain,
    SequentialRounds,
}

/// Classical channel between two nodes; usable in both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalChannelSpec {
    pub endpoints: [String; 2],
    pub propagation_delay: f64,
    pub processing_delay: f64,
}

impl ClassicalChannelSpec {
    pub fn t_comm(&self) -> f64 {
        self.propagation_delay + self.processing_delay
    }
}

/// Elementary entanglement-generating link.
///
/// Generation is slotted: one attempt per slot succeeding with `p_success`,
/// so the pair rate is `p_success / slot_duration`. `gen_rate`, when given,
/// must agree with that rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumLinkSpec {
    pub endpoints: [String; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gen_rate: Option<f64>,
    pub p_success: f64,
    pub base_fidelity: f64,
}

impl QuantumLinkSpec {
    pub fn entanglement_rate(&self, slot_duration: f64) -> f64 {
        self.p_success / slot_duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub nodes: Vec<NodeSpec>,
    pub quantum_links: Vec<QuantumLinkSpec>,
    #[serde(default)]
    pub classical_channels: Vec<ClassicalChannelSpec>,
    pub protocol: Protocol,
    #[serde(default = "default_rounds")]
    pub rounds_l: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversaryConfig>,
    pub seed: u64,
    pub n_trials: u64,
    pub slot_duration: f64,
    /// Extra or overriding profiles layered on top of the shipped defaults.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub crypto_profiles: Vec<CryptoProfile>,
}

fn default_rounds() -> u32 {
    1
}

impl ScenarioConfig {
    /// Shipped defaults overlaid with this scenario's own profiles.
    pub fn registry(&self) -> Registry {
        Registry::defaults().with_overrides(&self.crypto_profiles)
    }

    /// Parses and validates; any unknown key or invariant failure is an error.
    pub fn from_json(text: &str) -> Result<Self> {
        let parsed = parse_scenario(text)?;
        let mut violations = parsed.unknown_keys;
        violations.extend(validate_scenario(&parsed.config));
        if violations.is_empty() {
            Ok(parsed.config)
        } else {
            violations.sort();
            violations.dedup();
            Err(Error::InvalidScenario(violations))
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// A syntactically valid scenario plus any keys the schema does not know.
#[derive(Debug, Clone)]
pub struct ParsedScenario {
    pub config: ScenarioConfig,
    pub unknown_keys: Vec<Violation>,
}

pub fn parse_scenario(text: &str) -> Result<ParsedScenario> {
    let mut unknown = Vec::new();
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_ignored::deserialize(de, |path| {
        let path = path.to_string().replace(".?", "");
        unknown.push(Violation::new(path, "unknown key"));
    })?;
    Ok(ParsedScenario {
        config,
        unknown_keys: unknown,
    })
}

fn finite_nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

fn finite_pos(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn pair_key<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Checks every scenario invariant. The result is sorted, so it does not
/// depend on the order of nodes or links beyond the indices in the paths.
pub fn validate_scenario(config: &ScenarioConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let registry = config.registry();

    let mut profile_names = BTreeSet::new();
    for (i, p) in config.crypto_profiles.iter().enumerate() {
        if !profile_names.insert(p.name.as_str()) {
            out.push(Violation::new(
                format!("crypto_profiles.{i}.name"),
                format!("duplicate profile name `{}`", p.name),
            ));
        }
        if !finite_nonneg(p.t_encrypt) {
            out.push(Violation::new(
                format!("crypto_profiles.{i}.t_encrypt"),
                "must be finite and non-negative",
            ));
        }
        if !finite_nonneg(p.t_decrypt) {
            out.push(Violation::new(
                format!("crypto_profiles.{i}.t_decrypt"),
                "must be finite and non-negative",
            ));
        }
    }

    let mut ids: HashMap<&str, usize> = HashMap::new();
    for (i, node) in config.nodes.iter().enumerate() {
        if node.id.is_empty() {
            out.push(Violation::new(format!("nodes.{i}.id"), "must not be empty"));
        }
        if ids.insert(node.id.as_str(), i).is_some() {
            out.push(Violation::new(
                format!("nodes.{i}.id"),
                format!("duplicate node id `{}`", node.id),
            ));
        }
        if !finite_pos(node.memory.t_coh) {
            out.push(Violation::new(
                format!("nodes.{i}.memory.t_coh"),
                "must be finite and positive",
            ));
        }
        if !registry.contains(&node.crypto) {
            out.push(Violation::new(
                format!("nodes.{i}.crypto"),
                format!("profile not found: {}", node.crypto),
            ));
        }
    }

    let slot_ok = finite_pos(config.slot_duration);
    if !slot_ok {
        out.push(Violation::new("slot_duration", "must be finite and positive"));
    }
    if config.n_trials < 1 {
        out.push(Violation::new("n_trials", "must be at least 1"));
    }
    if config.rounds_l < 1 {
        out.push(Violation::new("rounds_l", "must be at least 1"));
    }

    let mut links_ok = true;
    let mut link_pairs = BTreeSet::new();
    for (i, link) in config.quantum_links.iter().enumerate() {
        let [a, b] = &link.endpoints;
        let path = format!("quantum_links.{i}.endpoints");
        for end in [a, b] {
            if !ids.contains_key(end.as_str()) {
                links_ok = false;
                out.push(Violation::new(&path, format!("unknown node `{end}`")));
            }
        }
        if a == b {
            links_ok = false;
            out.push(Violation::new(&path, "endpoints must be distinct"));
        } else if !link_pairs.insert(pair_key(a, b)) {
            links_ok = false;
            out.push(Violation::new(&path, format!("duplicate link `{a}`-`{b}`")));
        }
        if !(link.p_success > 0.0 && link.p_success <= 1.0) {
            out.push(Violation::new(
                format!("quantum_links.{i}.p_success"),
                "must lie in (0, 1]",
            ));
        }
        if !(0.25..=1.0).contains(&link.base_fidelity) {
            out.push(Violation::new(
                format!("quantum_links.{i}.base_fidelity"),
                "must lie in [0.25, 1]",
            ));
        }
        if let Some(rate) = link.gen_rate {
            let path = format!("quantum_links.{i}.gen_rate");
            if !finite_pos(rate) {
                out.push(Violation::new(path, "must be finite and positive"));
            } else if slot_ok {
                let implied = link.entanglement_rate(config.slot_duration);
                if (rate - implied).abs() > 1e-9 * implied.abs().max(rate) {
                    out.push(Violation::new(
                        path,
                        format!("disagrees with p_success / slot_duration = {implied}"),
                    ));
                }
            }
        }
    }

    let mut channels = BTreeSet::new();
    for (i, ch) in config.classical_channels.iter().enumerate() {
        let [a, b] = &ch.endpoints;
        let path = format!("classical_channels.{i}.endpoints");
        for end in [a, b] {
            if !ids.contains_key(end.as_str()) {
                out.push(Violation::new(&path, format!("unknown node `{end}`")));
            }
        }
        if a == b {
            out.push(Violation::new(&path, "endpoints must be distinct"));
        } else if !channels.insert(pair_key(a, b)) {
            out.push(Violation::new(&path, format!("duplicate channel `{a}`-`{b}`")));
        }
        if !finite_nonneg(ch.propagation_delay) {
            out.push(Violation::new(
                format!("classical_channels.{i}.propagation_delay"),
                "must be finite and non-negative",
            ));
        }
        if !finite_nonneg(ch.processing_delay) {
            out.push(Violation::new(
                format!("classical_channels.{i}.processing_delay"),
                "must be finite and non-negative",
            ));
        }
    }

    if let Some(adv) = &config.adversary {
        if !finite_nonneg(adv.t_eve) {
            out.push(Violation::new("adversary.t_eve", "must be finite and non-negative"));
        }
        if !finite_nonneg(adv.t_pqc) {
            out.push(Violation::new("adversary.t_pqc", "must be finite and non-negative"));
        }
        if !finite_pos(adv.t_coh_eve) {
            out.push(Violation::new("adversary.t_coh_eve", "must be finite and positive"));
        }
        if adv.intercept_link >= config.quantum_links.len() {
            out.push(Violation::new(
                "adversary.intercept_link",
                format!("no quantum link with index {}", adv.intercept_link),
            ));
        }
    }

    let ids_unique = ids.len() == config.nodes.len();
    if links_ok && ids_unique {
        match chain_path(config, &ids) {
            Ok(path) => {
                check_protocol_shape(config, &path, &channels, &mut out);
            }
            Err(v) => out.push(v),
        }
    }

    out.sort();
    out.dedup();
    out
}

/// Node indices along the end-to-end chain, source end first.
fn chain_path(config: &ScenarioConfig, ids: &HashMap<&str, usize>) -> std::result::Result<Vec<usize>, Violation> {
    let mut ends: Vec<usize> = config
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.role == NodeRole::EndNode)
        .map(|(i, _)| i)
        .collect();
    // The destination is the end node whose id sorts last, so list order
    // never changes which node receives corrections.
    ends.sort_by(|&a, &b| config.nodes[a].id.cmp(&config.nodes[b].id));
    if ends.len() != 2 {
        return Err(Violation::new(
            "nodes",
            format!("expected exactly two end_node roles, found {}", ends.len()),
        ));
    }
    let not_a_path = || {
        Violation::new(
            "quantum_links",
            "links must form a simple path between the two end nodes covering every node",
        )
    };
    let n = config.nodes.len();
    if config.quantum_links.len() + 1 != n {
        return Err(not_a_path());
    }
    let mut adj = vec![Vec::new(); n];
    for link in &config.quantum_links {
        let a = ids[link.endpoints[0].as_str()];
        let b = ids[link.endpoints[1].as_str()];
        adj[a].push(b);
        adj[b].push(a);
    }
    if ends.iter().any(|&e| adj[e].len() != 1) || adj.iter().any(|nb| nb.len() > 2) {
        return Err(not_a_path());
    }
    let mut path = vec![ends[0]];
    let mut prev = usize::MAX;
    let mut cur = ends[0];
    while let Some(&next) = adj[cur].iter().find(|&&x| x != prev) {
        if path.contains(&next) {
            return Err(not_a_path());
        }
        path.push(next);
        prev = cur;
        cur = next;
    }
    if path.len() != n || cur != ends[1] {
        return Err(not_a_path());
    }
    Ok(path)
}

fn check_protocol_shape(
    config: &ScenarioConfig,
    path: &[usize],
    channels: &BTreeSet<(&str, &str)>,
    out: &mut Vec<Violation>,
) {
    let id = |i: usize| config.nodes[path[i]].id.as_str();
    let last = path.len() - 1;
    let missing = |a: usize, b: usize| {
        (!channels.contains(&pair_key(id(a), id(b)))).then(|| {
            Violation::new(
                "classical_channels",
                format!("missing channel between `{}` and `{}`", id(a), id(b)),
            )
        })
    };
    match config.protocol {
        Protocol::SingleHop | Protocol::SequentialRounds => {
            if path.len() != 2 {
                out.push(Violation::new(
                    "protocol",
                    "single_hop and sequential_rounds need exactly one quantum link between the end nodes",
                ));
            } else {
                out.extend(missing(0, 1));
            }
        }
        Protocol::ParallelChain => {
            if path.len() < 3 {
                out.push(Violation::new(
                    "protocol",
                    "parallel_chain needs at least one intermediate node",
                ));
            }
            out.extend((1..last).filter_map(|j| missing(j, last)));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkNode {
    pub id: String,
    pub t_coh: f64,
    pub t_encrypt: f64,
    pub t_decrypt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLink {
    /// Index into the scenario's `quantum_links`.
    pub config_index: usize,
    pub p_success: f64,
    pub base_fidelity: f64,
}

/// A validated scenario laid out along its chain.
///
/// `nodes[0]` is the source end node and the last entry is the destination
/// that receives corrections (the end node whose id sorts last); `links[i]` joins `nodes[i]` and `nodes[i + 1]`.
#[derive(Debug, Clone)]
pub struct Network {
    pub protocol: Protocol,
    pub rounds: u32,
    pub slot_duration: f64,
    pub nodes: Vec<NetworkNode>,
    pub links: Vec<NetworkLink>,
    pub adversary: Option<AdversaryConfig>,
    /// Chain position of the intercepted link, if an adversary is attached.
    pub intercepted: Option<usize>,
    channels: HashMap<(usize, usize), f64>,
}

impl Network {
    pub fn resolve(config: &ScenarioConfig) -> Result<Self> {
        let violations = validate_scenario(config);
        if !violations.is_empty() {
            return Err(Error::InvalidScenario(violations));
        }
        let ids: HashMap<&str, usize> = config
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let path = chain_path(config, &ids).map_err(|v| Error::InvalidScenario(vec![v]))?;
        let position: HashMap<usize, usize> = path.iter().enumerate().map(|(pos, &i)| (i, pos)).collect();

        let registry = config.registry();
        let nodes = path
            .iter()
            .map(|&i| {
                let spec = &config.nodes[i];
                let profile = registry.lookup(&spec.crypto)?;
                Ok(NetworkNode {
                    id: spec.id.clone(),
                    t_coh: spec.memory.t_coh,
                    t_encrypt: profile.t_encrypt,
                    t_decrypt: profile.t_decrypt,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut links: Vec<Option<NetworkLink>> = vec![None; path.len() - 1];
        for (k, link) in config.quantum_links.iter().enumerate() {
            let a = position[&ids[link.endpoints[0].as_str()]];
            let b = position[&ids[link.endpoints[1].as_str()]];
            links[a.min(b)] = Some(NetworkLink {
                config_index: k,
                p_success: link.p_success,
                base_fidelity: link.base_fidelity,
            });
        }
        let links: Vec<NetworkLink> = links.into_iter().map(|l| l.expect("path covers every link")).collect();

        let mut channels = HashMap::new();
        for ch in &config.classical_channels {
            let a = position[&ids[ch.endpoints[0].as_str()]];
            let b = position[&ids[ch.endpoints[1].as_str()]];
            channels.insert((a.min(b), a.max(b)), ch.t_comm());
        }

        let intercepted = config.adversary.as_ref().map(|adv| {
            links
                .iter()
                .position(|l| l.config_index == adv.intercept_link)
                .expect("intercept_link validated")
        });

        Ok(Self {
            protocol: config.protocol,
            rounds: config.rounds_l,
            slot_duration: config.slot_duration,
            nodes,
            links,
            adversary: config.adversary.clone(),
            intercepted,
            channels,
        })
    }

    pub fn source(&self) -> &NetworkNode {
        &self.nodes[0]
    }

    pub fn destination(&self) -> &NetworkNode {
        self.nodes.last().expect("at least two nodes")
    }

    pub fn destination_index(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_comm(&self, a: usize, b: usize) -> Option<f64> {
        self.channels.get(&(a.min(b), a.max(b))).copied()
    }

    /// Timing of one message from chain position `from` to `to`.
    pub fn message(&self, from: usize, to: usize) -> HopTiming {
        HopTiming {
            t_encrypt: self.nodes[from].t_encrypt,
            t_comm: self.t_comm(from, to).expect("required channels are validated"),
            t_decrypt: self.nodes[to].t_decrypt,
        }
    }
}
