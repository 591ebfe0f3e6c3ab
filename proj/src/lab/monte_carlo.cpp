#include "creditvote/lab/monte_carlo.hpp"

#include <cmath>

#include "creditvote/errors.hpp"
#include "creditvote/shares/shares.hpp"

namespace creditvote::lab {

double Proportion::se() const {
  if (trials == 0) return 0.0;
  const double p = rate();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

void Moments::add(double x) {
  ++n;
  const double d = x - mean;
  mean += d / static_cast<double>(n);
  m2 += d * (x - mean);
}

double Moments::sd() const { return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0; }
double Moments::se() const { return n > 0 ? sd() / std::sqrt(static_cast<double>(n)) : 0.0; }

namespace {

nlohmann::json to_json(const Proportion& p) {
  return {{"rate", p.rate()}, {"se", p.se()}, {"hits", p.hits}, {"trials", p.trials}};
}

nlohmann::json to_json(const Moments& m) {
  return {{"mean", m.mean}, {"sd", m.sd()}, {"se", m.se()}, {"n", m.n}};
}

bool covers(const kernel::RegressionResult& r, const std::string& name, double truth, double level) {
  const auto [lo, hi] = r.confidence_interval(name, level);
  return lo <= truth && truth <= hi;
}

}  // namespace

nlohmann::json to_json(const MonteCarloReport& r) {
  return {{"replications", r.replications},
          {"failed", r.failed},
          {"cutoff_recovery", to_json(r.cutoff_recovery)},
          {"cutoff_exact", to_json(r.cutoff_exact)},
          {"detected_alpha", to_json(r.detected_alpha)},
          {"share_coverage", to_json(r.share_coverage)},
          {"share_rejection", to_json(r.share_rejection)},
          {"share_estimate", to_json(r.share_estimate)},
          {"share_se", to_json(r.share_se)},
          {"nominate_coverage", to_json(r.nominate_coverage)},
          {"nominate_estimate", to_json(r.nominate_estimate)},
          {"first_stage_f", to_json(r.first_stage_f)}};
}

MonteCarloReport monte_carlo(const WorldConfig& config, const MonteCarloOptions& options) {
  config.validate();
  if (options.replications < 1) throw ConfigError("monte carlo needs at least one replication");
  MonteCarloReport report;
  const double alpha = 1.0 - options.level;

  for (std::size_t rep = 0; rep < options.replications; ++rep) {
    WorldConfig world = config;
    world.seed = stream_seed(config.seed, 1'000'000 + rep);
    const auto credit = generate_credit_panel(world, options.workers);
    const auto geography = build_geography(world);
    const auto planted = planted_thresholds(world);

    std::vector<int> years;
    for (int y : world.years)
      if (y % 2 == 0) years.push_back(y);
    const auto scan = rd::scan_panel(credit, options.rd, years, options.workers);
    for (const auto& zy : scan.zone_years) {
      const int truth = planted.at(zy.key.commuting_zone);
      const bool hit = zy.selected && std::abs(zy.selected->cutoff - truth) <= 5;
      report.cutoff_recovery.add(hit);
      report.cutoff_exact.add(zy.selected && zy.selected->cutoff == truth);
      if (zy.selected) report.detected_alpha.add(zy.selected->alpha);
    }

    const auto assigner = make_assigner(geography);
    const int bw[] = {options.bandwidth};
    const auto built = shares::compute_shares(credit, scan.thresholds, assigner, years, bw);
    const auto elections = generate_election_panel(credit, world);
    const auto assembled = panel::assemble_panel(built.records, elections.elections, elections.controls);

    ++report.replications;
    try {
      const auto e = panel::estimate_baseline(assembled.rows, panel::Outcome::RepShare, options.bandwidth,
                                              options.estimation);
      const double truth = world.votes.beta_share;
      report.share_coverage.add(covers(e.result, "share_total", truth, options.level));
      report.share_rejection.add(e.result.p_value("share_total") < alpha);
      report.share_estimate.add(e.result.coef("share_total"));
      report.share_se.add(e.result.se("share_total"));
      if (auto it = e.result.diagnostics.find("first_stage_F"); it != e.result.diagnostics.end())
        report.first_stage_f.add(it->second);
      if (options.estimate_nominate) {
        const auto n = panel::estimate_nominate(assembled.rows, panel::Subset::All, options.bandwidth,
                                                panel::Specification::Pooled, options.estimation);
        report.nominate_coverage.add(covers(n.result, "share_total", world.votes.beta_nominate, options.level));
        report.nominate_estimate.add(n.result.coef("share_total"));
      }
    } catch (const EstimationError&) {
      ++report.failed;
    }
  }
  return report;
}

}  // namespace creditvote::lab
