#include "krail/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "krail/delimited.hpp"
#include "krail/error.hpp"
#include "krail/kernels.hpp"
#include "krail/session.hpp"
#include "krail/text.hpp"

namespace krail {

namespace {

constexpr std::size_t kEvalColumns = 9;

std::string row_prefix(std::size_t row) { return "row " + std::to_string(row) + ": "; }

EvalCase parse_eval_row(const delimited::Record& rec, const EntryStore& store) {
  const auto& f = rec.fields;
  const auto where = row_prefix(rec.row);
  EvalCase c;
  c.row = rec.row;

  auto table = parse_table_id(f[1]);
  if (!table) throw Error(ErrorCode::FieldError, where + "unknown table '" + f[1] + "'", "table");
  c.case_input = {f[0], *table};
  try {
    validate_case(c.case_input);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidCase, where + e.what(), "case_text");
  }

  c.truth_entry_id = f[2];
  const IdTableEntry* entry = store.find(c.truth_entry_id);
  if (!entry) {
    throw Error(ErrorCode::InvalidCase, where + "truth_entry_id '" + f[2] + "' is not in the store", "truth_entry_id");
  }
  if (entry->table != *table) {
    throw Error(ErrorCode::InvalidCase,
                where + "truth_entry_id '" + f[2] + "' belongs to table " + std::string(table_code(entry->table)),
                "truth_entry_id");
  }

  auto pif = try_parse_pif_code(f[3]);
  if (!pif) throw Error(ErrorCode::MalformedPifCode, where + "malformed truth_pif '" + f[3] + "'", "truth_pif");
  auto cfms = parse_cfm_set(f[4]);
  if (!cfms || cfms->empty()) {
    throw Error(ErrorCode::FieldError, where + "malformed truth_cfms '" + f[4] + "'", "truth_cfms");
  }
  c.truth.pif = *pif;
  c.truth.cfms = *cfms;
  c.truth.task = f[5];
  c.truth.pif_measure = f[6];
  c.truth.other_pifs = f[7];
  c.reference_id = f[8];
  return c;
}

double seconds(std::chrono::nanoseconds d) { return std::chrono::duration<double>(d).count(); }

AccuracySummary accuracy(std::vector<double> hits, std::uint64_t seed, const EvalConfig& config) {
  AccuracySummary out;
  if (hits.empty()) return out;
  // Sorting makes the bootstrap depend only on the hit count, not case order.
  std::sort(hits.begin(), hits.end());
  out.hits = static_cast<std::size_t>(std::count(hits.begin(), hits.end(), 1.0));
  const auto ms = mean_std(hits);
  out.mean = static_cast<double>(out.hits) / static_cast<double>(hits.size());
  out.std = ms.std;
  out.ci = bootstrap_ci(hits, config.n_resamples, config.level, seed);
  return out;
}

}  // namespace

std::vector<EvalCase> load_eval_dataset(std::istream& in, const EntryStore& store) {
  delimited::Reader reader(in);
  auto header = reader.next();
  if (!header) throw Error(ErrorCode::FormatError, "row 1: missing header");
  std::string joined;
  for (std::size_t i = 0; i < header->fields.size(); ++i) joined += (i ? "," : "") + header->fields[i];
  if (joined != kEvalDatasetHeader) {
    throw Error(ErrorCode::FormatError,
                row_prefix(header->row) + "header must be exactly '" + std::string(kEvalDatasetHeader) + "'");
  }
  std::vector<EvalCase> cases;
  while (auto rec = reader.next()) {
    if (rec->fields.size() != kEvalColumns) {
      throw Error(ErrorCode::FormatError, row_prefix(rec->row) + "expected " + std::to_string(kEvalColumns) +
                                              " fields, got " + std::to_string(rec->fields.size()));
    }
    cases.push_back(parse_eval_row(*rec, store));
  }
  return cases;
}

std::vector<EvalCase> load_eval_dataset_file(const std::filesystem::path& path, const EntryStore& store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FormatError, "cannot open " + path.string());
  try {
    return load_eval_dataset(in, store);
  } catch (const Error& e) {
    throw Error(e.code(), path.filename().string() + ": " + e.what(), e.subject());
  }
}

void serialize_eval_dataset(const std::vector<EvalCase>& cases, std::ostream& out) {
  out << kEvalDatasetHeader << '\n';
  for (const auto& c : cases) {
    delimited::write_row(out, {delimited::quote(c.case_input.data_source_text),
                               std::string(table_code(c.case_input.table)),
                               delimited::quote_if_needed(c.truth_entry_id),
                               c.truth.pif.to_string(),
                               render_cfm_set(c.truth.cfms),
                               delimited::quote(c.truth.task),
                               delimited::quote(c.truth.pif_measure),
                               delimited::quote(c.truth.other_pifs),
                               delimited::quote_if_needed(c.reference_id)});
  }
}

bool text_matches(std::string_view truth, std::string_view candidate) {
  const auto t = text::word_tokens(truth);
  return !t.empty() && t == text::word_tokens(candidate);
}

EvalOutcome score_case(const CandidateAttributeSet& candidates, const HepResolution& resolution,
                       const EvalCase& truth) {
  EvalOutcome out;
  auto set = [&](Dimension d, bool v) { out.hits[static_cast<std::size_t>(d)] = v; };
  set(Dimension::Pif, std::find(candidates.pif.begin(), candidates.pif.end(), truth.truth.pif) != candidates.pif.end());
  set(Dimension::Cfm, std::find(candidates.cfm.begin(), candidates.cfm.end(), truth.truth.cfms) != candidates.cfm.end());
  auto any_text = [](const std::vector<std::string>& list, const std::string& want) {
    return std::any_of(list.begin(), list.end(), [&](const std::string& c) { return text_matches(want, c); });
  };
  set(Dimension::TaskAndErrorMeasure, any_text(candidates.task_and_error_measure, truth.truth.task));
  set(Dimension::PifMeasure, any_text(candidates.pif_measure, truth.truth.pif_measure));
  set(Dimension::OtherPifsAndUncertainty, any_text(candidates.other_pifs_and_uncertainty, truth.truth.other_pifs));
  out.resolution_hit = top5_contains(resolution, truth.truth_entry_id);
  return out;
}

EvalSummary summarize(std::vector<EvalOutcome> outcomes, const EvalConfig& config) {
  EvalSummary s;
  s.config = config;
  s.n = outcomes.size();
  for (const auto& o : outcomes) s.failures += o.failed ? 1 : 0;

  for (std::size_t d = 0; d < kAllDimensions.size(); ++d) {
    std::vector<double> hits;
    for (const auto& o : outcomes) hits.push_back(o.hits[d] ? 1.0 : 0.0);
    s.dimensions[d] = accuracy(std::move(hits), kernels::derive_seed(config.seed, d), config);
  }
  std::vector<double> res;
  for (const auto& o : outcomes) res.push_back(o.resolution_hit ? 1.0 : 0.0);
  s.resolution = accuracy(std::move(res), kernels::derive_seed(config.seed, kAllDimensions.size()), config);

  std::map<std::string, std::vector<double>> by_stage;
  for (const auto& o : outcomes) {
    for (const auto& [stage, d] : o.timings) by_stage[stage].push_back(seconds(d));
  }
  for (auto& [stage, values] : by_stage) {
    const auto ms = mean_std(values);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.timings[stage] = {values.size(), ms.mean, ms.std, *lo, *hi};
  }
  s.outcomes = std::move(outcomes);
  return s;
}

EvalSummary run_evaluation(const std::vector<EvalCase>& dataset, const KnowledgeGraph& graph, Provider& provider,
                           const EvalConfig& config) {
  std::vector<EvalOutcome> outcomes(dataset.size());
  const auto n = static_cast<std::int64_t>(dataset.size());

#pragma omp parallel for schedule(dynamic) if (config.parallel_cases && n > 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& c = dataset[static_cast<std::size_t>(i)];
    auto& out = outcomes[static_cast<std::size_t>(i)];
    std::string stage = "create";
    try {
      auto s = create_session(c.case_input, config.shots, config.ablation, "eval-" + std::to_string(i));
      if (!config.ablation) {
        stage = "decompose";
        advance_decompose(s, provider);
      }
      stage = "attribute";
      advance_attribute(s, graph, provider, {kDefaultContextEntries, c.reference_id});
      stage = "resolve";
      advance_resolve(s, graph);

      out = score_case(*s.candidates, *s.resolution, c);
      out.timings = s.timings;
      for (const auto& e : s.audit_log) {
        if (e.action != "attributed") continue;
        const auto payload = nlohmann::json::parse(e.payload);
        for (const auto& id : payload.at("shot_entry_ids")) out.shot_entry_ids.push_back(id.get<std::string>());
      }
    } catch (const std::exception& e) {
      out = EvalOutcome{};
      out.failed = true;
      out.diagnostic = "case " + std::to_string(i) + " (row " + std::to_string(c.row) + ") failed at " + stage +
                       ": " + e.what();
    }
  }
  return summarize(std::move(outcomes), config);
}

RunComparison compare_outcomes(const std::vector<EvalOutcome>& baseline, const std::vector<EvalOutcome>& other) {
  if (baseline.size() != other.size()) {
    throw Error(ErrorCode::InvalidArgument, "cannot compare runs of " + std::to_string(baseline.size()) + " and " +
                                                std::to_string(other.size()) + " cases");
  }
  auto tally = [](HitPartition& p, bool base, bool alt) {
    if (base && !alt) ++p.better;
    else if (!base && alt) ++p.worse;
    else ++p.unchanged;
  };
  RunComparison out;
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    for (std::size_t d = 0; d < kAllDimensions.size(); ++d) tally(out.dimensions[d], baseline[i].hits[d], other[i].hits[d]);
    tally(out.resolution, baseline[i].resolution_hit, other[i].resolution_hit);
  }
  return out;
}

TTestResult compare_timings(const std::vector<EvalOutcome>& a, const std::vector<EvalOutcome>& b,
                            const std::string& stage) {
  auto collect = [&](const std::vector<EvalOutcome>& run) {
    std::vector<double> v;
    for (const auto& o : run) {
      if (auto it = o.timings.find(stage); it != o.timings.end()) v.push_back(seconds(it->second));
    }
    return v;
  };
  const auto va = collect(a);
  const auto vb = collect(b);
  return t_test_welch(va, vb);
}

const std::vector<PublishedAccuracy>& published_accuracies() {
  using T = TableId;
  static const std::vector<PublishedAccuracy> rows = {
      {T::ScenarioFamiliarity, 0, {0.628, 0.893, 0.622, 0.720, 0.374}, {0.119, 0.069, 0.115, 0.112, 0.112}},
      {T::ScenarioFamiliarity, 1, {0.659, 0.862, 0.858, 0.835, 0.526}, {0.106, 0.079, 0.078, 0.076, 0.103}},
      {T::ScenarioFamiliarity, 3, {0.663, 0.896, 0.857, 0.836, 0.669}, {0.103, 0.064, 0.072, 0.075, 0.103}},
      {T::ScenarioFamiliarity, 5, {0.777, 0.888, 0.946, 0.872, 0.666}, {0.171, 0.132, 0.096, 0.136, 0.204}},
      {T::InfoAvailabilityReliability, 0, {0.635, 1.000, 0.861, 0.732, 0.747}, {0.317, 0.000, 0.223, 0.286, 0.276}},
      {T::InfoAvailabilityReliability, 1, {0.511, 1.000, 1.000, 0.640, 0.860}, {0.320, 0.000, 0.000, 0.300, 0.224}},
      {T::InfoAvailabilityReliability, 3, {0.731, 1.000, 1.000, 0.630, 0.875}, {0.288, 0.000, 0.000, 0.317, 0.216}},
      {T::InfoAvailabilityReliability, 5, {0.886, 1.000, 1.000, 0.869, 1.000}, {0.209, 0.000, 0.000, 0.068, 0.000}},
      {T::TaskComplexity, 0, {0.742, 0.941, 0.794, 0.394, 0.675}, {0.161, 0.091, 0.149, 0.195, 0.175}},
      {T::TaskComplexity, 1, {0.665, 1.000, 0.891, 0.605, 0.890}, {0.153, 0.000, 0.107, 0.163, 0.108}},
      {T::TaskComplexity, 3, {0.584, 1.000, 0.791, 0.735, 0.933}, {0.190, 0.000, 0.162, 0.159, 0.094}},
      {T::TaskComplexity, 5, {0.720, 1.000, 0.943, 0.677, 0.943}, {0.157, 0.000, 0.079, 0.163, 0.079}},
  };
  return rows;
}

namespace {

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

constexpr std::size_t kLabelWidth = 22;
constexpr std::size_t kCellWidth = 18;

}  // namespace

std::string render_summary(const EvalSummary& summary, std::optional<TableId> table) {
  std::ostringstream out;
  const auto& cfg = summary.config;
  const std::string shots = std::to_string(cfg.shots.k()) + "-shot";
  out << "Evaluation: n=" << summary.n << ", shots=" << cfg.shots.k() << ", ablation=" << (cfg.ablation ? "yes" : "no")
      << ", seed=" << cfg.seed << ", resamples=" << cfg.n_resamples << ", failures=" << summary.failures << '\n';
  if (table) out << "Table: " << table_code(*table) << " (" << table_title(*table) << ")\n";
  out << '\n';

  out << pad("Configuration", kLabelWidth);
  for (Dimension d : kAllDimensions) out << pad(std::string(dimension_title(d)), kCellWidth);
  out << pad("Base HEP top-5", kCellWidth) << '\n';

  out << pad(shots + (cfg.ablation ? " (no agents)" : ""), kLabelWidth);
  if (summary.n == 0) {
    out << "no cases\n";
    return out.str();
  }
  for (Dimension d : kAllDimensions) {
    const auto& a = summary.dimension(d);
    out << pad(fmt3(a.mean) + "±" + fmt3(a.std), kCellWidth + 1);  // ± is two bytes
  }
  out << fmt3(summary.resolution.mean) + "±" + fmt3(summary.resolution.std) << '\n';

  out << pad(fmt3(cfg.level * 100.0).substr(0, 2) + "% CI", kLabelWidth);
  for (Dimension d : kAllDimensions) {
    const auto& ci = *summary.dimension(d).ci;
    out << pad("[" + fmt3(ci.lo) + ", " + fmt3(ci.hi) + "]", kCellWidth);
  }
  const auto& rci = *summary.resolution.ci;
  out << "[" + fmt3(rci.lo) + ", " + fmt3(rci.hi) + "]" << '\n';

  if (table) {
    for (const auto& p : published_accuracies()) {
      if (p.table != *table || p.shots != cfg.shots.k()) continue;
      out << pad("published " + shots, kLabelWidth);
      for (std::size_t d = 0; d < 5; ++d) out << pad(fmt3(p.mean[d]) + "±" + fmt3(p.std[d]), kCellWidth + 1);
      out << "-\n";
      out << "(published values come from a different model and are shown for reference only)\n";
    }
  }

  if (!summary.timings.empty()) {
    out << "\nStage timings (ms):\n";
    for (const auto& [stage, t] : summary.timings) {
      out << "  " << pad(stage, 12) << "mean " << fmt3(t.mean_s * 1e3) << "  std " << fmt3(t.std_s * 1e3)
          << "  min " << fmt3(t.min_s * 1e3) << "  max " << fmt3(t.max_s * 1e3) << "  n=" << t.n << '\n';
    }
  }
  bool header = false;
  for (const auto& o : summary.outcomes) {
    if (!o.failed) continue;
    if (!header) out << "\nFailures (counted as misses):\n";
    header = true;
    out << "  " << o.diagnostic << '\n';
  }
  return out.str();
}

nlohmann::json summary_to_json(const EvalSummary& summary, bool include_timings) {
  using nlohmann::json;
  auto acc = [](const AccuracySummary& a) {
    json j = {{"hits", a.hits}, {"mean", a.mean}, {"std", a.std}};
    j["ci"] = a.ci ? json{{"lo", a.ci->lo}, {"hi", a.ci->hi}, {"level", a.ci->level}} : json(nullptr);
    return j;
  };
  json dims = json::object();
  for (Dimension d : kAllDimensions) dims[std::string(dimension_key(d))] = acc(summary.dimension(d));

  json cases = json::array();
  for (const auto& o : summary.outcomes) {
    json hits = json::object();
    for (Dimension d : kAllDimensions) hits[std::string(dimension_key(d))] = o.hit(d);
    cases.push_back({{"hits", hits},
                     {"resolution_hit", o.resolution_hit},
                     {"failed", o.failed},
                     {"diagnostic", o.diagnostic},
                     {"shot_entry_ids", o.shot_entry_ids}});
  }

  const auto& cfg = summary.config;
  json out = {{"config",
               {{"shots", cfg.shots.k()},
                {"ablation", cfg.ablation},
                {"seed", cfg.seed},
                {"n_resamples", cfg.n_resamples},
                {"level", cfg.level}}},
              {"n", summary.n},
              {"failures", summary.failures},
              {"dimensions", dims},
              {"resolution", acc(summary.resolution)},
              {"cases", cases}};
  if (include_timings) {
    json t = json::object();
    for (const auto& [stage, s] : summary.timings) {
      t[stage] = {{"n", s.n}, {"mean_s", s.mean_s}, {"std_s", s.std_s}, {"min_s", s.min_s}, {"max_s", s.max_s}};
    }
    out["timings"] = t;
  }
  return out;
}

}  // namespace krail
