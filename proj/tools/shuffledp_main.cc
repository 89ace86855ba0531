// Copyright 2026 The ShuffleDP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// shuffledp: experiment runner. Writes a JSON report (and optionally a CSV
// mirror of its per-row table) and exits 0 iff every embedded assertion
// passes.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/statusor.h"
#include "experiments.h"
#include "shuffledp/auditor.h"
#include "shuffledp/status_macros.h"

namespace shuffledp {
namespace {

using experiments::Json;
using experiments::Report;

struct Output {
  std::string json_path;
  std::string csv_path;
};

void AddOutput(CLI::App* cmd, Output& out) {
  cmd->add_option("--out", out.json_path, "JSON report path (default stdout)");
  cmd->add_option("--csv", out.csv_path, "CSV mirror of the report's table");
}

absl::StatusOr<Json> ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError("cannot open " + path);
  Json j = Json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return absl::InvalidArgumentError("bad JSON in " + path);
  return j;
}

std::string CsvCell(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Writes the first array of flat objects found under a table key.
bool WriteCsv(const Json& data, const std::string& path) {
  for (const char* key : {"per_trial", "rows"}) {
    if (!data.contains(key) || !data[key].is_array() || data[key].empty()) {
      continue;
    }
    const Json& rows = data[key];
    std::ofstream out(path);
    std::vector<std::string> columns;
    for (const auto& [k, v] : rows.front().items()) columns.push_back(k);
    for (size_t i = 0; i < columns.size(); ++i) {
      out << (i ? "," : "") << columns[i];
    }
    out << "\n";
    for (const Json& row : rows) {
      for (size_t i = 0; i < columns.size(); ++i) {
        out << (i ? "," : "")
            << (row.contains(columns[i]) ? CsvCell(row[columns[i]]) : "");
      }
      out << "\n";
    }
    return true;
  }
  return false;
}

int Emit(const absl::StatusOr<Report>& report, const Output& out) {
  if (!report.ok()) {
    std::cerr << "error: " << report.status() << "\n";
    return 1;
  }
  const std::string text = report->data.dump(2) + "\n";
  if (out.json_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream(out.json_path) << text;
  }
  if (!out.csv_path.empty() && !WriteCsv(report->data, out.csv_path)) {
    std::cerr << "note: report has no table; no CSV written\n";
  }
  std::cerr << (report->pass ? "PASS " : "FAIL ") << report->summary << "\n";
  return report->pass ? 0 : 1;
}

}  // namespace
}  // namespace shuffledp

int main(int argc, char** argv) {
  using namespace shuffledp;
  CLI::App app("Shuffle-model privacy experiments");
  app.require_subcommand(1);
  Output out;
  std::function<absl::StatusOr<Report>()> action;

  // countdistinct
  CLI::App* cd = app.add_subcommand("countdistinct", "Distinct-count protocols");
  cd->require_subcommand(1);

  experiments::CountDistinctOptions cd_run;
  std::string engine = "aggregate";
  CLI::App* run = cd->add_subcommand("run", "Accuracy trials");
  run->add_option("--n", cd_run.n)->required();
  run->add_option("--D", cd_run.D)->required();
  run->add_option("--eps", cd_run.epsilon)->required();
  run->add_option("--delta", cd_run.delta)->required();
  run->add_option("--gamma", cd_run.gamma, "Participation fraction (robust)");
  run->add_flag("--public-coin", cd_run.public_coin);
  run->add_option("--trials", cd_run.trials)->required();
  run->add_option("--seed", cd_run.seed)->required();
  run->add_option("--engine", engine)
      ->check(CLI::IsMember({"aggregate", "per-user"}));
  run->add_option("--pool", cd_run.pool, "Distinct input pool size");
  run->add_option("--c", cd_run.c, "Error constant: c sqrt(D) / eps");
  run->add_option("--pass-rate", cd_run.pass_rate);
  AddOutput(run, out);
  run->callback([&] {
    cd_run.engine = engine == "per-user" ? countdistinct::Engine::kPerUser
                                         : countdistinct::Engine::kAggregate;
    action = [&] { return experiments::CountDistinctRun(cd_run); };
  });

  experiments::MessageComplexityOptions msg;
  CLI::App* messages = cd->add_subcommand("messages", "Messages per user");
  messages->add_option("--n", msg.n);
  messages->add_option("--eps", msg.epsilon);
  messages->add_option("--delta", msg.delta);
  messages->add_option("--invocations", msg.invocations);
  messages->add_option("--base-D", msg.base_D);
  messages->add_option("--supplementary-n", msg.supplementary_n);
  messages->add_option("--seed", msg.seed)->required();
  AddOutput(messages, out);
  messages->callback(
      [&] { action = [&] { return experiments::MessageComplexity(msg); }; });

  experiments::LocalWeakOptions weak;
  CLI::App* local = cd->add_subcommand("local-weak", "Weak-privacy local protocol");
  local->add_option("--n", weak.ns, "Sizes for the local epsilon check");
  local->add_option("--accuracy-n", weak.accuracy_n);
  local->add_option("--trials", weak.trials);
  local->add_option("--c", weak.c, "Error constant: c sqrt(n)");
  local->add_option("--pass-rate", weak.pass_rate);
  local->add_option("--seed", weak.seed)->required();
  AddOutput(local, out);
  local->callback([&] { action = [&] { return experiments::LocalWeak(weak); }; });

  // selection
  CLI::App* sel = app.add_subcommand("selection", "Selection protocol");
  sel->require_subcommand(1);
  experiments::SelectionOptions sel_opts;
  CLI::App* sel_run = sel->add_subcommand("run", "Planted-instance trials");
  sel_run->add_option("--D", sel_opts.D)->required();
  sel_run->add_option("--k", sel_opts.k)->required();
  sel_run->add_option("--eps", sel_opts.epsilon)->required();
  sel_run->add_option("--delta", sel_opts.delta)->required();
  sel_run->add_option("--planted-gap", sel_opts.planted_gap)->required();
  sel_run->add_option("--trials", sel_opts.trials)->required();
  sel_run->add_option("--seed", sel_opts.seed)->required();
  sel_run->add_option("--n", sel_opts.n, "Users (default: calibrated)");
  sel_run->add_option("--pass-rate", sel_opts.pass_rate);
  AddOutput(sel_run, out);
  sel_run->callback(
      [&] { action = [&] { return experiments::SelectionRun(sel_opts); }; });

  // audit
  CLI::App* aud = app.add_subcommand("audit", "Numerical privacy audits");
  aud->require_subcommand(1);

  experiments::PrivacyAuditOptions noise_audit;
  CLI::App* l74 = aud->add_subcommand("noise-audit", "One-coordinate divergences");
  l74->alias("lemma7.4");
  l74->add_option("--n", noise_audit.ns)->required();
  l74->add_option("--eps", noise_audit.epsilons)->required();
  l74->add_option("--delta", noise_audit.deltas)->required();
  l74->add_option("--holders", noise_audit.holders);
  AddOutput(l74, out);
  l74->callback([&] { action = [&] { return experiments::PrivacyAudit(noise_audit); }; });

  experiments::ParityIdentityOptions parity;
  CLI::App* par = aud->add_subcommand("parity-identity", "Parity of Bin(n, q')");
  par->add_option("--n", parity.ns);
  par->add_option("--eps0", parity.eps0s);
  par->add_option("--tol", parity.tolerance);
  AddOutput(par, out);
  par->callback([&] { action = [&] { return experiments::ParityIdentity(parity); }; });

  std::string matrix_path;
  double dom_delta = 0.0;
  CLI::App* dom = aud->add_subcommand("domination", "Minimal dominating measure");
  dom->add_option("--matrix", matrix_path)->required();
  dom->add_option("--delta", dom_delta);
  AddOutput(dom, out);
  dom->callback([&] {
    action = [&]() -> absl::StatusOr<Report> {
      ASSIGN_OR_RETURN(Json j, ReadJsonFile(matrix_path));
      ASSIGN_OR_RETURN(auto rows, experiments::MatrixFromJson(j));
      ASSIGN_OR_RETURN(RandomizerMatrix m, RandomizerMatrix::Create(rows));
      ASSIGN_OR_RETURN(audit::DominationCertificate c,
                       audit::FindMinDomination(m, dom_delta));
      const double ldp = audit::ExactLdpEpsilon(m, dom_delta);
      Report r;
      r.pass = c.residual_delta <= dom_delta + 1e-12;
      r.data = {{"delta", dom_delta},
                {"value", c.epsilon_star},
                {"dominating", c.dominating},
                {"residual_delta", c.residual_delta},
                {"bound", ldp},
                {"pass", r.pass}};
      std::ostringstream s;
      s << "eps* = " << c.epsilon_star << " (local eps " << ldp
        << "), residual delta " << c.residual_delta;
      r.summary = s.str();
      return r;
    };
  });

  std::string grid_path;
  experiments::HsBoundOptions hs;
  CLI::App* hsb = aud->add_subcommand("hs-bound", "Hockey-stick lower bound");
  hsb->add_option("--grid", grid_path,
                  "JSON with optional identity/train/validate point arrays");
  AddOutput(hsb, out);
  hsb->callback([&] {
    action = [&]() -> absl::StatusOr<Report> {
      if (!grid_path.empty()) {
        ASSIGN_OR_RETURN(Json j, ReadJsonFile(grid_path));
        if (j.contains("identity")) {
          ASSIGN_OR_RETURN(hs.identity_grid,
                           experiments::HsPointsFromJson(j["identity"]));
        }
        if (j.contains("train")) {
          ASSIGN_OR_RETURN(hs.train, experiments::HsPointsFromJson(j["train"]));
        }
        if (j.contains("validate")) {
          ASSIGN_OR_RETURN(hs.validate,
                           experiments::HsPointsFromJson(j["validate"]));
        }
      }
      return experiments::HsBound(hs);
    };
  });

  experiments::DominatedOptions dominated;
  CLI::App* domd = aud->add_subcommand("dominated", "Dominated-randomizer suite");
  domd->add_option("--instances", dominated.instances);
  domd->add_option("--seed", dominated.seed)->required();
  AddOutput(domd, out);
  domd->callback([&] { action = [&] { return experiments::Dominated(dominated); }; });

  experiments::OracleEquivalenceOptions oracle;
  CLI::App* exact = aud->add_subcommand("exact-shuffle",
                                        "Exact shuffle divergence vs enumeration");
  exact->add_option("--max-users", oracle.max_users)->check(CLI::Range(1, 4));
  AddOutput(exact, out);
  exact->callback(
      [&] { action = [&] { return experiments::OracleEquivalence(oracle); }; });

  // hardness
  CLI::App* hard = app.add_subcommand("hardness", "Hard-instance experiments");
  hard->require_subcommand(1);

  experiments::MomentMatchingOptions mm;
  CLI::App* mom = hard->add_subcommand("moments", "Moment-matched pairs");
  mom->add_option("--L", mm.Ls);
  mom->add_option("--c", mm.c, "Lambda = c L^2");
  mom->add_option("--step", mm.grid_step);
  mom->add_option("--target-gap", mm.target_gap);
  AddOutput(mom, out);
  mom->callback([&] { action = [&] { return experiments::MomentMatching(mm); }; });

  experiments::PoissonTvOptions ptv;
  CLI::App* pois = hard->add_subcommand("poisson-tv", "Poisson-mixture TV");
  pois->add_option("--L", ptv.L);
  pois->add_option("--dimension", ptv.dimension);
  pois->add_option("--c", ptv.c, "Lambda = c L^2");
  pois->add_option("--step", ptv.grid_step);
  pois->add_option("--samples", ptv.samples);
  pois->add_option("--seed", ptv.seed)->required();
  AddOutput(pois, out);
  pois->callback([&] { action = [&] { return experiments::PoissonTv(ptv); }; });

  experiments::ParityDistinctOptions pd;
  CLI::App* pdc = hard->add_subcommand("parity-distinct",
                                       "Distinct count of parity mixtures");
  pdc->add_option("--D", pd.D);
  pdc->add_option("--alpha", pd.alphas);
  pdc->add_option("--seeds", pd.seeds);
  pdc->add_option("--pass-rate", pd.pass_rate);
  pdc->add_option("--seed", pd.seed)->required();
  AddOutput(pdc, out);
  pdc->callback([&] { action = [&] { return experiments::ParityDistinct(pd); }; });

  // sq
  CLI::App* sqc = app.add_subcommand("sq", "Statistical-query simulation");
  sqc->require_subcommand(1);
  experiments::SqSimulationOptions sim;
  std::string sim_matrix, noise = "worst";
  CLI::App* simulate = sqc->add_subcommand("simulate", "Rejection-sampling draws");
  simulate->add_option("--matrix", sim_matrix,
                       "Randomizer JSON (default: randomized response, ln 3)");
  simulate->add_option("--beta", sim.beta)->required();
  simulate->add_option("--runs", sim.runs)->required();
  simulate->add_option("--seed", sim.seed)->required();
  simulate->add_option("--input", sim.input, "Input law (default uniform)");
  simulate->add_option("--noise", noise)
      ->check(CLI::IsMember({"none", "worst", "random"}));
  AddOutput(simulate, out);
  simulate->callback([&] {
    sim.mode = noise == "none"     ? sq::NoiseMode::kNone
               : noise == "random" ? sq::NoiseMode::kRandom
                                   : sq::NoiseMode::kWorstCase;
    action = [&]() -> absl::StatusOr<Report> {
      if (!sim_matrix.empty()) {
        ASSIGN_OR_RETURN(Json j, ReadJsonFile(sim_matrix));
        ASSIGN_OR_RETURN(sim.matrix, experiments::MatrixFromJson(j));
      }
      return experiments::SqSimulation(sim);
    };
  });

  // distinguish
  CLI::App* dis = app.add_subcommand("distinguish",
                                     "Uniform vs parity-mixture transcripts");
  dis->require_subcommand(1);
  experiments::DistinguishOptions dopt;
  CLI::App* drun = dis->add_subcommand("run", "Likelihood-ratio test");
  drun->add_option("--alpha", dopt.alpha)->required();
  drun->add_option("--D", dopt.D);
  drun->add_option("--ell", dopt.ell);
  drun->add_option("--s", dopt.s, "Parity vector (default: seeded)");
  drun->add_option("--keep", dopt.keep, "Per-bit keep probability");
  drun->add_option("--n", dopt.n);
  drun->add_option("--trials", dopt.trials);
  drun->add_option("--seed", dopt.seed);
  AddOutput(drun, out);
  drun->callback([&] { action = [&] { return experiments::Distinguish(dopt); }; });

  CLI11_PARSE(app, argc, argv);
  return Emit(action(), out);
}
