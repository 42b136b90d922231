#include "rcr/runner.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rcr/estimators.hpp"
#include "rcr/oracle.hpp"
#include "rcr/percolation.hpp"
#include "rcr/rng.hpp"
#include "rcr/verification.hpp"

namespace rcr {

const char* kBuildId = "rcr-0.1.0";

namespace {

Point point_from_json(const nlohmann::json& j, const ModelParams& p) {
    Point pt;
    pt.site.coords = j.at("site").get<std::vector<int>>();
    if ((int)pt.site.coords.size() != p.d)
        throw std::invalid_argument("observable.points: site dimension mismatch");
    for (int& c : pt.site.coords) {
        if (c < 0 || c >= p.N) throw std::invalid_argument("observable.points: coordinate out of range");
    }
    pt.time = j.at("time").get<double>();
    if (!(pt.time >= 0.0 && pt.time < p.beta))
        throw std::invalid_argument("observable.points: time outside [0, beta)");
    return pt;
}

std::vector<double> range_from_json(const nlohmann::json& j) {
    return j.get<std::vector<double>>();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig c;
    if (!j.contains("params")) throw std::invalid_argument("config: missing field 'params'");
    c.params = ModelParams::from_json(j.at("params").dump());
    if (!j.contains("command")) throw std::invalid_argument("config: missing field 'command'");
    c.command = j.at("command").get<std::string>();

    if (j.contains("observable")) {
        const auto& o = j.at("observable");
        c.obs_kind = o.value("kind", "");
        if (o.contains("points")) {
            for (const auto& pj : o.at("points")) c.obs_points.push_back(point_from_json(pj, c.params));
        }
    }
    c.nsamples = j.value("nsamples", (uint64_t)10000);
    if (j.contains("seed")) {
        c.seed = j.at("seed").get<uint64_t>();
        c.seed_given = true;
    }
    c.output = j.value("output", std::string{});
    c.workers = j.value("workers", 1);
    c.delta = j.value("delta", 0.1);
    c.max_distance = j.value("max_distance", 5);
    c.rho_low = j.value("rho_low", 0.3);
    c.rho_high = j.value("rho_high", 0.6);
    c.nconfigs = j.value("nconfigs", 500);
    c.max_arrivals = j.value("max_arrivals", 12);
    if (j.contains("scan")) {
        const auto& s = j.at("scan");
        if (s.contains("h")) c.scan_h = range_from_json(s.at("h"));
        if (s.contains("rho")) c.scan_rho = range_from_json(s.at("rho"));
        if (s.contains("lambda")) c.scan_lambda = range_from_json(s.at("lambda"));
        if (s.contains("beta")) c.scan_beta = range_from_json(s.at("beta"));
    }
    return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

namespace {

uint64_t effective_seed(const RunConfig& c) {
    if (const char* env = std::getenv("RCR_SEED")) return std::strtoull(env, nullptr, 10);
    if (c.seed_given) return c.seed;
    return splitmix64((uint64_t)std::random_device{}());
}

void write_lines(const std::string& path, const std::string& header,
                 const std::vector<std::string>& rows, bool append = false) {
    if (path.empty()) {
        std::cout << header << "\n";
        for (const auto& r : rows) std::cout << r << "\n";
        return;
    }
    const bool exists = static_cast<bool>(std::ifstream(path));
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    if (!append || !exists) out << header << "\n";
    for (const auto& r : rows) out << r << "\n";
}

void json_report(const RunConfig& c, uint64_t seed, const std::string& command, bool pass,
                 const nlohmann::ordered_json& detail) {
    if (!c.json_summary) return;
    nlohmann::ordered_json j;
    j["command"] = command;
    j["build_id"] = kBuildId;
    j["params_hash"] = c.params.hash();
    j["seed"] = seed;
    j["pass"] = pass;
    j["detail"] = detail;
    std::cout << j.dump() << std::endl;
}

Observable parse_observable(const RunConfig& c) {
    if (c.obs_kind.empty())
        throw std::invalid_argument("observable.kind: required for this command");
    return Observable{obs_kind_from_name(c.obs_kind), c.obs_points};
}

int run_estimate(const RunConfig& c, uint64_t seed) {
    const Observable obs = parse_observable(c);
    Estimate e;
    switch (obs.kind) {
        case ObsKind::trunc_zz:
        case ObsKind::trunc_xx:
        case ObsKind::trunc_zx:
            e = estimate_truncated_switch(c.params, obs, c.nsamples, seed, c.workers);
            break;
        case ObsKind::triple:
            if (obs.points.size() != 2)
                throw std::invalid_argument("triple: give the two neighbour points w, z");
            e = estimate_triple(c.params, obs.points[0], obs.points[1], c.nsamples, seed,
                                c.workers);
            break;
        case ObsKind::crossmany: {
            if (obs.points.size() < 2)
                throw std::invalid_argument("crossmany: give u followed by the v list");
            std::vector<Point> vlist(obs.points.begin() + 1, obs.points.end());
            e = estimate_crossmany(c.params, obs.points[0], vlist, c.nsamples, seed, c.workers);
            break;
        }
        default:
            e = estimate(c.params, obs, c.nsamples, seed, c.workers);
    }
    write_lines(c.output, estimate_csv_header(), {estimate_csv_row(e, c.params)}, true);
    std::cout << e.observable << ": " << e.mean << " +- " << e.stderr_ << "  (n=" << e.nsamples
              << ", seed=" << e.seed << ")\n";
    nlohmann::ordered_json d;
    d["mean"] = e.mean;
    d["stderr"] = e.stderr_;
    json_report(c, seed, "estimate", true, d);
    return 0;
}

int run_oracle(const RunConfig& c, uint64_t seed) {
    const Observable obs = parse_observable(c);
    OracleSystem sys(c.params);
    double value = 0.0;
    switch (obs.kind) {
        case ObsKind::partition: value = sys.partition_function(); break;
        case ObsKind::sz:
            value = sys.ordered_correlation({{OpKind::sz, obs.points.at(0)}});
            break;
        case ObsKind::sigx:
            value = sys.ordered_correlation({{OpKind::sigx, obs.points.at(0)}});
            break;
        case ObsKind::szsz:
        case ObsKind::sigxsigx:
        case ObsKind::szsigx: {
            const OpKind a = obs.kind == ObsKind::sigxsigx ? OpKind::sigx : OpKind::sz;
            const OpKind b = obs.kind == ObsKind::szsz ? OpKind::sz : OpKind::sigx;
            std::vector<Insertion> ins{{a, obs.points.at(0)}, {b, obs.points.at(1)}};
            if (ins[0].at.time > ins[1].at.time) std::swap(ins[0], ins[1]);
            value = sys.ordered_correlation(ins);
            break;
        }
        case ObsKind::trunc_zz:
            value = sys.truncated(OpKind::sz, obs.points.at(0), OpKind::sz, obs.points.at(1));
            break;
        case ObsKind::trunc_xx:
            value = sys.truncated(OpKind::sigx, obs.points.at(0), OpKind::sigx, obs.points.at(1));
            break;
        case ObsKind::trunc_zx:
            value = sys.truncated(OpKind::sz, obs.points.at(0), OpKind::sigx, obs.points.at(1));
            break;
        default:
            throw std::invalid_argument("oracle: unsupported observable kind");
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    write_lines(c.output, "observable,value,params_hash",
                {c.obs_kind + "," + std::string(buf) + "," + c.params.hash()}, true);
    std::cout << "oracle " << c.obs_kind << ": " << value << "\n";
    nlohmann::ordered_json d;
    d["value"] = value;
    json_report(c, seed, "oracle", true, d);
    return 0;
}

int run_verify_switching(const RunConfig& c, uint64_t seed) {
    const auto s = verify_switching(c.nconfigs, c.max_arrivals, seed);
    std::vector<std::string> rows;
    for (const auto& r : s.rows) {
        std::ostringstream os;
        const char* vn = r.variant == SwitchVariant::zz   ? "zz"
                         : r.variant == SwitchVariant::xx ? "xx"
                                                          : "zx";
        os << r.config_id << "," << vn << "," << r.lhs << "," << r.rhs << "," << r.arrivals;
        rows.push_back(os.str());
    }
    write_lines(c.output, "config_id,variant,lhs,rhs,arrivals", rows);
    std::cout << "verify-switching: " << c.nconfigs << " configurations, " << s.failures
              << " failures\n";
    nlohmann::ordered_json d;
    d["nconfigs"] = c.nconfigs;
    d["failures"] = s.failures;
    json_report(c, seed, "verify-switching", s.failures == 0, d);
    return s.failures == 0 ? 0 : 1;
}

int run_verify_labels(const RunConfig& c, uint64_t seed) {
    const auto s = verify_labels(c.nconfigs, seed);
    std::cout << "verify-labels: " << s.n << " instances, " << s.failures << " failures\n";
    nlohmann::ordered_json d;
    d["n"] = s.n;
    d["failures"] = s.failures;
    json_report(c, seed, "verify-labels", s.failures == 0, d);
    return s.failures == 0 ? 0 : 1;
}

int run_verify_transform(const RunConfig& c, uint64_t seed) {
    const auto s = verify_transform(c.nconfigs, seed);
    std::cout << "verify-transform: " << s.n << " instances, " << s.failures << " failures\n";
    for (const auto& note : s.notes) std::cout << "  note: " << note << "\n";
    nlohmann::ordered_json d;
    d["n"] = s.n;
    d["failures"] = s.failures;
    json_report(c, seed, "verify-transform", s.failures == 0, d);
    return s.failures == 0 ? 0 : 1;
}

int run_diffineq(const RunConfig& c, uint64_t seed) {
    const std::vector<double> grid{0.2, 0.5, 1.0};
    const std::vector<double> hs = c.scan_h.empty() ? grid : c.scan_h;
    const std::vector<double> rhos = c.scan_rho.empty() ? grid : c.scan_rho;
    const std::vector<double> lambdas = c.scan_lambda.empty() ? grid : c.scan_lambda;
    const std::vector<double> betas =
        c.scan_beta.empty() ? std::vector<double>{c.params.beta} : c.scan_beta;
    const auto rows = diffineq_report(c.params, hs, rhos, lambdas, betas);
    std::vector<std::string> lines;
    bool all = true;
    for (const auto& r : rows) {
        lines.push_back(diffineq_csv_row(r));
        all = all && r.pass;
    }
    write_lines(c.output, diffineq_csv_header(), lines);
    std::cout << "diffineq: " << rows.size() << " points, " << (all ? "all pass" : "FAILURES")
              << "\n";
    nlohmann::ordered_json d;
    d["points"] = rows.size();
    json_report(c, seed, "diffineq", all, d);
    return all ? 0 : 1;
}

int run_percolation(const RunConfig& c, uint64_t seed) {
    std::vector<std::pair<SlotSite, SlotSite>> pairs;
    for (int k = 1; k <= c.max_distance && k < c.params.N; ++k) {
        SlotSite a{0, 0};
        Site s = site_from_index(0, c.params);
        s.coords[0] = k;
        pairs.push_back({a, SlotSite{0, site_index(s, c.params)}});
    }
    const auto table = percbound_experiment(c.params, c.delta, pairs, c.nsamples, seed);
    std::vector<std::string> rows;
    for (const auto& r : table.rows) rows.push_back(perc_csv_row(r));
    write_lines(c.output, perc_csv_header(), rows);
    std::cout << "percolation: fitted log-slope " << table.fitted_slope << " over "
              << table.positive_rows << " positive rows\n";
    nlohmann::ordered_json d;
    d["fitted_slope"] = table.fitted_slope;
    d["positive_rows"] = table.positive_rows;
    json_report(c, seed, "percolation", true, d);
    return 0;
}

int run_decay_scan(const RunConfig& c, uint64_t seed) {
    OracleSystem sys(c.params);
    std::vector<std::pair<double, double>> pts;
    std::vector<std::string> rows;
    const Point origin{site_from_index(0, c.params), 0.0};
    for (int k = 1; k <= c.max_distance && k <= c.params.N / 2; ++k) {
        Site s = origin.site;
        s.coords[0] = k;
        const double v = sys.truncated(OpKind::sz, origin, OpKind::sz, Point{s, 0.0});
        pts.push_back({(double)k, v});
        char buf[80];
        std::snprintf(buf, sizeof buf, "%d,%.17g", k, v);
        rows.push_back(buf);
    }
    const DecayFit fit = decay_fit(pts);
    write_lines(c.output, "distance,trunc_zz", rows);
    std::cout << "decay-scan: c1=" << fit.c1 << " r2=" << fit.r2 << " over " << fit.n_used
              << " distances\n";
    nlohmann::ordered_json d;
    d["c1"] = fit.c1;
    d["r2"] = fit.r2;
    json_report(c, seed, "decay-scan", fit.c1 > 0.0, d);
    return fit.c1 > 0.0 ? 0 : 1;
}

int run_monotonicity(const RunConfig& c, uint64_t seed) {
    ModelParams p = c.params;
    const Point u{site_from_index(0, p), 0.0};

    ModelParams plow = p, phigh = p;
    plow.rho = c.rho_low;
    phigh.rho = c.rho_high;
    const RateProfile low = full_rates(plow), high = full_rates(phigh);
    ModelParams sampler = p;
    sampler.rho = std::max(c.rho_low, c.rho_high);
    const auto rep = monotonicity_check(sampler, low, high, u, c.nsamples, seed, c.workers);

    // Reduced-rate variant: suppress flips across one segment boundary.
    std::vector<GroundSegment> region{{site_from_index(p.N > 1 ? 1 : 0, p), false, 0.0,
                                       p.beta / 2}};
    const RateProfile reduced = reduced_rates(phigh, region);
    const auto rep2 = monotonicity_check(sampler, reduced, high, u, c.nsamples, seed ^ 0x7177,
                                         c.workers);

    const auto ce = condexp_check(phigh, region, u,
                                  {Point{region[0].site, 0.0}, Point{region[0].site, p.beta / 2}},
                                  c.nsamples, seed ^ 0x5150, c.workers);

    const bool pass = rep.pass && rep2.pass && ce.pass;
    std::cout << "monotonicity: homogeneous " << (rep.pass ? "pass" : "FAIL") << " (diff "
              << rep.difference << " +- " << rep.combined_stderr << ")\n"
              << "monotonicity: reduced-rate " << (rep2.pass ? "pass" : "FAIL") << " (diff "
              << rep2.difference << " +- " << rep2.combined_stderr << ")\n"
              << "condexp: " << (ce.pass ? "pass" : "FAIL") << " (slack " << ce.slack << " +- "
              << ce.combined_stderr << ")\n";
    nlohmann::ordered_json d;
    d["homogeneous_diff"] = rep.difference;
    d["reduced_diff"] = rep2.difference;
    d["condexp_slack"] = ce.slack;
    json_report(c, seed, "monotonicity", pass, d);
    return pass ? 0 : 1;
}

}  // namespace

int run(RunConfig config) {
    config.params.validate();
    const uint64_t seed = effective_seed(config);
    if (!config.scan_h.empty() || !config.scan_rho.empty() || !config.scan_lambda.empty() ||
        !config.scan_beta.empty()) {
        if (config.command == "estimate" || config.command == "oracle") return scan(config);
    }
    if (config.command == "estimate") return run_estimate(config, seed);
    if (config.command == "oracle") return run_oracle(config, seed);
    if (config.command == "verify-switching") return run_verify_switching(config, seed);
    if (config.command == "verify-labels") return run_verify_labels(config, seed);
    if (config.command == "verify-transform") return run_verify_transform(config, seed);
    if (config.command == "diffineq") return run_diffineq(config, seed);
    if (config.command == "percolation") return run_percolation(config, seed);
    if (config.command == "decay-scan") return run_decay_scan(config, seed);
    if (config.command == "monotonicity") return run_monotonicity(config, seed);
    throw std::invalid_argument("command: unknown command '" + config.command + "'");
}

int scan(RunConfig config) {
    config.params.validate();
    const uint64_t seed = effective_seed(config);
    auto one = [](std::vector<double> v, double fallback) {
        return v.empty() ? std::vector<double>{fallback} : v;
    };
    const auto hs = one(config.scan_h, config.params.h);
    const auto rhos = one(config.scan_rho, config.params.rho);
    const auto lambdas = one(config.scan_lambda, config.params.lambda);
    const auto betas = one(config.scan_beta, config.params.beta);

    // Completed-row detection: existing rows are keyed by params hash.
    std::set<std::string> done;
    std::set<std::string> expected;
    {
        std::vector<ModelParams> pts;
        for (double b : betas)
            for (double h : hs)
                for (double r : rhos)
                    for (double l : lambdas) {
                        ModelParams p = config.params;
                        p.beta = b;
                        p.h = h;
                        p.rho = r;
                        p.lambda = l;
                        expected.insert(p.hash());
                    }
    }
    if (!config.output.empty()) {
        std::ifstream in(config.output);
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (first) {
                first = false;
                continue;
            }
            const auto pos = line.rfind(',');
            if (pos == std::string::npos) continue;
            const std::string hash = line.substr(pos + 1);
            if (!expected.count(hash))
                throw std::invalid_argument("scan: output file contains rows from other params");
            done.insert(hash);
        }
    }

    int count = 0;
    for (double b : betas) {
        for (double h : hs) {
            for (double r : rhos) {
                for (double l : lambdas) {
                    RunConfig point = config;
                    point.params.beta = b;
                    point.params.h = h;
                    point.params.rho = r;
                    point.params.lambda = l;
                    point.scan_h.clear();
                    point.scan_rho.clear();
                    point.scan_lambda.clear();
                    point.scan_beta.clear();
                    point.seed = derive_seed(seed, count);
                    point.seed_given = true;
                    ++count;
                    if (done.count(point.params.hash())) continue;
                    const int rc = run(point);
                    if (rc != 0) return rc;
                }
            }
        }
    }
    return 0;
}

}  // namespace rcr
