#include "gwp/scenario.hpp"

#include "gwp/errors.hpp"

#include "gwp/inference.hpp"
#include "gwp/mixed_model.hpp"
#include "gwp/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace gwp {

void ScenarioConfig::validate() const {
    if (clusters < 4 || clusters % 2 != 0)
        throw std::invalid_argument("scenario: clusters must be even and >= 4");
    if (cluster_size < 1)
        throw std::invalid_argument("scenario: cluster_size must be >= 1");
    if (size_mode == ClusterSizeMode::deletion &&
        !(deletion_prob > 0.0 && deletion_prob < 1.0))
        throw std::invalid_argument("scenario: deletion_prob must lie in (0,1)");
    if (theta_targets.empty() || theta_targets.size() > 2)
        throw std::invalid_argument("scenario: theta_targets needs 1 or 2 entries");
    for (double t : theta_targets)
        if (!(t > 0.0 && t < 1.0))
            throw std::invalid_argument("scenario: theta targets must lie in (0,1)");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("scenario: level must lie in (0,1)");
    if (reps < 1)
        throw std::invalid_argument("scenario: reps must be >= 1");
    if (threads < 1)
        throw std::invalid_argument("scenario: threads must be >= 1");
}

double ScenarioConfig::true_theta() const {
    double s = 0.0;
    for (double t : theta_targets) s += t;
    return s / static_cast<double>(theta_targets.size());
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(trim(s.substr(start)));
            return out;
        }
        out.push_back(trim(s.substr(start, pos - start)));
        start = pos + 1;
    }
}

double parse_num(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (...) {
        throw ConfigError("config: key '" + key + "': cannot parse number '" + v + "'");
    }
}

BinomialSpec parse_binomial(const std::string& key, const std::string& v) {
    // accepted form: binomial(n, p)
    const std::string t = trim(v);
    if (t.rfind("binomial(", 0) != 0 || t.back() != ')')
        throw ConfigError("config: key '" + key + "': expected binomial(n,p), got '" + v + "'");
    const auto parts = split(t.substr(9, t.size() - 10), ',');
    if (parts.size() != 2)
        throw ConfigError("config: key '" + key + "': expected binomial(n,p)");
    BinomialSpec b;
    b.n = static_cast<int>(parse_num(key, parts[0]));
    b.p = parse_num(key, parts[1]);
    if (b.n < 1 || !(b.p >= 0.0 && b.p <= 1.0))
        throw ConfigError("config: key '" + key + "': invalid binomial parameters");
    return b;
}

using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: line " + std::to_string(line_no) +
                              ": empty key or value");
        if (!kv.emplace(key, value).second)
            throw ConfigError("config: duplicate key '" + key + "'");
    }
    return kv;
}

// Applies one key to the config; list-valued keys must already be split.
void apply_key(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "clusters") {
        cfg.clusters = static_cast<int>(parse_num(key, value));
    } else if (key == "allocation") {
        if (trim(value) != "1:1")
            throw ConfigError("config: only 1:1 allocation is supported");
    } else if (key == "cluster_size") {
        cfg.cluster_size = static_cast<int>(parse_num(key, value));
    } else if (key == "deletion_prob") {
        cfg.deletion_prob = parse_num(key, value);
        cfg.size_mode = cfg.deletion_prob > 0.0 ? ClusterSizeMode::deletion
                                                : ClusterSizeMode::equal;
    } else if (key == "marginals.control.k1") {
        cfg.control_k1 = parse_binomial(key, value);
    } else if (key == "marginals.control.k2") {
        cfg.control_k2 = parse_binomial(key, value);
    } else if (key == "theta_targets") {
        cfg.theta_targets.clear();
        for (const auto& part : split(value, ','))
            cfg.theta_targets.push_back(parse_num(key, part));
    } else if (key == "omega12") {
        cfg.corr.omega12 = parse_num(key, value);
    } else if (key == "phi11") {
        cfg.corr.phi11 = parse_num(key, value);
    } else if (key == "phi22") {
        cfg.corr.phi22 = parse_num(key, value);
    } else if (key == "phi12") {
        cfg.corr.phi12 = parse_num(key, value);
    } else if (key == "level") {
        cfg.level = parse_num(key, value);
    } else if (key == "scale") {
        const std::string v = trim(value);
        if (v == "identity")
            cfg.scale = IntervalScaleChoice::identity;
        else if (v == "logit")
            cfg.scale = IntervalScaleChoice::logit;
        else if (v == "both")
            cfg.scale = IntervalScaleChoice::both;
        else
            throw ConfigError("config: scale must be identity, logit or both");
    } else if (key == "reps") {
        cfg.reps = static_cast<int>(parse_num(key, value));
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_num(key, value));
    } else if (key == "threads") {
        cfg.threads = static_cast<int>(parse_num(key, value));
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

ScenarioConfig config_from_kv(const KeyValues& kv) {
    ScenarioConfig cfg;
    for (const auto& [k, v] : kv) apply_key(cfg, k, v);
    cfg.validate();
    return cfg;
}

} // namespace

ScenarioConfig parse_scenario_config(std::istream& in) {
    return config_from_kv(read_key_values(in));
}

ScenarioConfig parse_scenario_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    return parse_scenario_config(in);
}

std::vector<ScenarioConfig> expand_scenario_grid(std::istream& in) {
    KeyValues kv = read_key_values(in);

    auto take_list = [&](const char* key) {
        std::vector<std::string> items;
        auto it = kv.find(key);
        if (it != kv.end()) {
            items = split(it->second, ';');
            kv.erase(it);
        }
        return items;
    };
    std::vector<std::string> cluster_list = take_list("clusters");
    std::vector<std::string> omega_list = take_list("omega12");
    std::vector<std::string> theta_list = take_list("theta_targets");
    if (cluster_list.empty()) cluster_list.push_back("");
    if (omega_list.empty()) omega_list.push_back("");
    if (theta_list.empty()) theta_list.push_back("");

    std::vector<ScenarioConfig> out;
    for (const auto& c : cluster_list) {
        for (const auto& o : omega_list) {
            for (const auto& t : theta_list) {
                ScenarioConfig cfg;
                for (const auto& [k, v] : kv) apply_key(cfg, k, v);
                if (!c.empty()) apply_key(cfg, "clusters", c);
                if (!o.empty()) apply_key(cfg, "omega12", o);
                if (!t.empty()) apply_key(cfg, "theta_targets", t);
                cfg.validate();
                out.push_back(cfg);
            }
        }
    }
    return out;
}

std::vector<ScenarioConfig> expand_scenario_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    return expand_scenario_grid(in);
}

namespace {

struct ReplicateOutcome {
    bool ok = false;
    double theta_hat = 0.0;
    double icc_hat = 0.0;
    // [0] identity, [1] logit
    bool contains[2] = {false, false};
    bool left_miss[2] = {false, false};
    bool right_miss[2] = {false, false};
    bool reject[2] = {false, false};
};

GeneratorConfig build_generator(const ScenarioConfig& cfg) {
    const double theta1 = cfg.theta_targets.front();
    const double theta2 = cfg.theta_targets.back();

    GeneratorConfig g;
    g.clusters_control = cfg.clusters / 2;
    g.clusters_treatment = cfg.clusters / 2;
    g.size_mode = cfg.size_mode;
    g.cluster_size = cfg.cluster_size;
    g.deletion_prob = cfg.deletion_prob;

    g.control.k1 = OrdinalMarginal::binomial(cfg.control_k1.n, cfg.control_k1.p);
    g.control.k2 = OrdinalMarginal::binomial(cfg.control_k2.n, cfg.control_k2.p);
    const double p1_k1 = solve_treatment_p(cfg.control_k1.n, g.control.k1, theta1);
    const double p1_k2 = solve_treatment_p(cfg.control_k2.n, g.control.k2, theta2);
    g.treatment.k1 = OrdinalMarginal::binomial(cfg.control_k1.n, p1_k1);
    g.treatment.k2 = OrdinalMarginal::binomial(cfg.control_k2.n, p1_k2);

    // Intermediate correlations are solved per arm with that arm's
    // marginals; the target (discretized) correlations are shared.
    g.control.latent = solve_latent_correlations(g.control.k1, g.control.k2, cfg.corr);
    g.treatment.latent = solve_latent_correlations(g.treatment.k1, g.treatment.k2, cfg.corr);
    return g;
}

ReplicateOutcome run_replicate(const GeneratorConfig& gen, const ScenarioConfig& cfg,
                               double true_theta, std::uint64_t replicate_index) {
    ReplicateOutcome out;
    try {
        const TrialDataset d = generate_trial(gen, stream_seed(cfg.seed, replicate_index));
        const GlobalWinFractionTable g = global_win_fractions(d);
        const LmmFit fit = fit_reml(d, g);
        const GwpEstimate est = estimate_gwp(fit, {1.0, 1.0});
        out.theta_hat = est.theta_hat;
        out.icc_hat = est.icc_hat;

        const Scale scales[2] = {Scale::identity, Scale::logit};
        for (int s = 0; s < 2; ++s) {
            const IntervalEstimate ci =
                confidence_interval(est, cfg.level, scales[s], Critical::student_t);
            out.contains[s] = ci.lower <= true_theta && true_theta <= ci.upper;
            out.left_miss[s] = ci.lower > true_theta;
            out.right_miss[s] = ci.upper < true_theta;
            out.reject[s] = ci.lower > 0.5 || ci.upper < 0.5;
        }
        out.ok = true;
    } catch (const std::exception&) {
        out.ok = false;
    }
    return out;
}

ScaleTally tally_scale(const std::vector<ReplicateOutcome>& outcomes, int s, int used) {
    long contain = 0, left = 0, right = 0, reject = 0;
    for (const auto& o : outcomes) {
        if (!o.ok) continue;
        contain += o.contains[s];
        left += o.left_miss[s];
        right += o.right_miss[s];
        reject += o.reject[s];
    }
    ScaleTally t;
    const double denom = static_cast<double>(used);
    t.ecp = 100.0 * static_cast<double>(contain) / denom;
    t.left_tail = 100.0 * static_cast<double>(left) / denom;
    t.right_tail = 100.0 * static_cast<double>(right) / denom;
    t.err = 100.0 * static_cast<double>(reject) / denom;
    t.ter_defined = right > 0;
    t.ter = t.ter_defined ? static_cast<double>(left) / static_cast<double>(right) : 0.0;
    return t;
}

} // namespace

ScenarioMetrics run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const GeneratorConfig gen = build_generator(cfg);
    const double true_theta = cfg.true_theta();

    std::vector<ReplicateOutcome> outcomes(cfg.reps);
    const int n_threads = std::max(1, std::min<int>(cfg.threads, cfg.reps));
    if (n_threads == 1) {
        for (int r = 0; r < cfg.reps; ++r)
            outcomes[r] = run_replicate(gen, cfg, true_theta, static_cast<std::uint64_t>(r));
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back([&, t]() {
                for (int r = t; r < cfg.reps; r += n_threads)
                    outcomes[r] =
                        run_replicate(gen, cfg, true_theta, static_cast<std::uint64_t>(r));
            });
        }
        for (auto& th : pool) th.join();
    }

    ScenarioMetrics m;
    m.true_theta = true_theta;
    m.reps_requested = cfg.reps;
    for (const auto& o : outcomes) {
        if (o.ok)
            ++m.reps_used;
        else
            ++m.reps_failed;
    }
    if (m.reps_used == 0)
        throw std::runtime_error("run_scenario: every replicate failed");
    if (static_cast<double>(m.reps_failed) > 0.01 * cfg.reps)
        throw std::runtime_error("run_scenario: " + std::to_string(m.reps_failed) + " of " +
                                 std::to_string(cfg.reps) + " replicates failed (> 1%)");

    double sum_theta = 0.0, sum_icc = 0.0;
    for (const auto& o : outcomes) {
        if (!o.ok) continue;
        sum_theta += o.theta_hat;
        sum_icc += o.icc_hat;
    }
    m.mean_theta_hat = sum_theta / m.reps_used;
    m.mean_icc_hat = sum_icc / m.reps_used;
    m.identity = tally_scale(outcomes, 0, m.reps_used);
    m.logit = tally_scale(outcomes, 1, m.reps_used);
    return m;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void append_scale(std::ostringstream& os, const char* name, const ScaleTally& t) {
    os << name << ".ecp = " << fmt(t.ecp) << "\n";
    os << name << ".left_tail = " << fmt(t.left_tail) << "\n";
    os << name << ".right_tail = " << fmt(t.right_tail) << "\n";
    os << name << ".ter = " << (t.ter_defined ? fmt(t.ter) : "undefined") << "\n";
    os << name << ".err = " << fmt(t.err) << "\n";
}

} // namespace

std::string format_metrics_report(const ScenarioConfig& cfg, const ScenarioMetrics& m) {
    std::ostringstream os;
    os << "clusters = " << cfg.clusters << "\n";
    os << "cluster_size = " << cfg.cluster_size << "\n";
    os << "deletion_prob = " << fmt(cfg.deletion_prob) << "\n";
    os << "omega12 = " << fmt(cfg.corr.omega12) << "\n";
    os << "phi11 = " << fmt(cfg.corr.phi11) << "\n";
    os << "phi22 = " << fmt(cfg.corr.phi22) << "\n";
    os << "phi12 = " << fmt(cfg.corr.phi12) << "\n";
    os << "theta_true = " << fmt(m.true_theta) << "\n";
    os << "level = " << fmt(cfg.level) << "\n";
    os << "reps = " << m.reps_requested << "\n";
    os << "reps_used = " << m.reps_used << "\n";
    os << "reps_failed = " << m.reps_failed << "\n";
    os << "seed = " << cfg.seed << "\n";
    if (cfg.scale != IntervalScaleChoice::logit) append_scale(os, "identity", m.identity);
    if (cfg.scale != IntervalScaleChoice::identity) append_scale(os, "logit", m.logit);
    os << "mean_theta_hat = " << fmt(m.mean_theta_hat) << "\n";
    os << "mean_icc_hat = " << fmt(m.mean_icc_hat) << "\n";
    return os.str();
}

std::string format_metrics_row(const ScenarioConfig& cfg, const ScenarioMetrics& m) {
    std::ostringstream os;
    os << "clusters=" << cfg.clusters;
    os << " cluster_size=" << cfg.cluster_size;
    os << " deletion_prob=" << fmt(cfg.deletion_prob);
    os << " omega12=" << fmt(cfg.corr.omega12);
    os << " theta_true=" << fmt(m.true_theta);
    os << " reps_used=" << m.reps_used;
    os << " reps_failed=" << m.reps_failed;
    const auto add_scale = [&](const char* name, const ScaleTally& t) {
        os << " " << name << ".ecp=" << fmt(t.ecp);
        os << " " << name << ".left=" << fmt(t.left_tail);
        os << " " << name << ".right=" << fmt(t.right_tail);
        os << " " << name << ".ter=" << (t.ter_defined ? fmt(t.ter) : "undefined");
        os << " " << name << ".err=" << fmt(t.err);
    };
    if (cfg.scale != IntervalScaleChoice::logit) add_scale("identity", m.identity);
    if (cfg.scale != IntervalScaleChoice::identity) add_scale("logit", m.logit);
    os << " mean_theta_hat=" << fmt(m.mean_theta_hat);
    os << " mean_icc_hat=" << fmt(m.mean_icc_hat);
    os << " seed=" << cfg.seed;
    return os.str();
}

} // namespace gwp
