#include "cli_app.hpp"

#include <sys/wait.h>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "examforge/composer.hpp"
#include "examforge/json_io.hpp"
#include "examforge/service.hpp"
#include "examforge/workspace.hpp"

namespace examforge::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string format = "text";
  std::string bank;

  // bank validate / list
  std::string bank_path;
  std::string subarea;
  std::string unused_since;
  std::string ilo;
  int solo = 0;

  // exam new
  int points = 0;
  std::vector<std::string> slot_lists;
  std::string date;
  std::string seed;
  int recency_days = kDefaultRecencyWindowDays;
  std::string difficulty;
  std::string id;

  // exam step / accept / render / ...
  std::string session;
  std::vector<std::string> pins;
  std::vector<int> unpins;
  std::string out_dir;
  bool solutions = false;
  std::string compile;
  std::string name = "exam";
  std::string snapshot;

  // serve
  std::string listen = "127.0.0.1:8080";
};

bool json_output(const Options& o) { return o.format == "json"; }

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

// Left-aligned text table with a header row; columns separated by two spaces.
void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return;
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      line += r[c];
      if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
    }
    out << line << "\n";
  }
}

fs::path require_bank(const Options& o) {
  if (o.bank.empty()) {
    throw UsageError("no bank directory given (use --bank or set " + std::string(kBankEnvVar) + ")");
  }
  return o.bank;
}

struct SessionRef {
  fs::path bank_dir;
  std::string id;
};

// A session is named either by id (bank from --bank / EXAMFORGE_BANK) or by
// the path of its transcript inside `<bank>/sessions/`.
SessionRef resolve_session(const Options& o) {
  const fs::path p(o.session);
  if (p.extension() == ".jsonl" && fs::is_regular_file(p)) {
    const fs::path abs = fs::absolute(p);
    return {o.bank.empty() ? abs.parent_path().parent_path() : fs::path(o.bank),
            abs.stem().string()};
  }
  return {require_bank(o), o.session};
}

void print_metrics(std::ostream& out, const DraftMetrics& m, int target) {
  out << "total " << m.total_points << "/" << target << " points  weighted difficulty "
      << fixed(m.weighted_difficulty, 4) << "\n";
  out << "SOLO histogram";
  for (std::size_t i = 0; i < 5; ++i) out << "  " << i + 1 << ":" << m.solo_histogram[i];
  out << "\n";
  out << "ILO coverage  "
      << join(std::vector<std::string>(m.ilo_coverage.begin(), m.ilo_coverage.end()), ", ")
      << "\n";
}

void print_failure(std::ostream& out, const Step& st) {
  out << "no draft (" << st.failure_code << "): " << st.failure_message << "\n";
  if (!st.failure) return;
  const auto& r = *st.failure;
  out << "  feasible " << (r.feasible ? "yes" : "no")
      << (r.verdict == Verdict::kProbabilistic ? " (probabilistic)" : "") << ", reason "
      << r.reason << "\n";
  out << "  completions (duplicates allowed) " << r.completion_count.str() << "\n";
  out << "  target " << r.target_points << ", pinned " << r.pinned_points << ", remaining "
      << r.remaining_points << "\n";
  if (r.achievable_point_range) {
    out << "  achievable totals " << r.achievable_point_range->min << ".."
        << r.achievable_point_range->max << "\n";
  } else {
    out << "  achievable totals none (a slot has no candidates)\n";
  }
  out << "  candidates per slot";
  for (std::size_t i = 0; i < r.per_slot_candidate_counts.size(); ++i) {
    out << "  " << i + 1 << ":" << r.per_slot_candidate_counts[i];
  }
  out << "\n";
  if (r.observed_difficulty) {
    out << "  observed difficulty " << fixed(r.observed_difficulty->min, 4) << ".."
        << fixed(r.observed_difficulty->max, 4) << "\n";
  }
}

void print_step(std::ostream& out, const Session& s, const Step& st, const Bank& bank) {
  out << "session " << s.id << "  step " << st.step_number << "  seed " << st.seed << "  dv "
      << st.decision_vector.to_string() << "\n";
  if (!st.draft) {
    print_failure(out, st);
    return;
  }
  std::vector<std::vector<std::string>> rows{
      {"slot", "subarea", "problem", "pin", "points", "SOLO", "difficulty", "ILOs"}};
  for (std::size_t i = 0; i < st.draft->assignment.size(); ++i) {
    const Problem& p = bank.at(st.draft->assignment[i]);
    rows.push_back({std::to_string(i + 1), s.blueprint.slots[i].subarea, p.id,
                    st.decision_vector.entries[i].is_random() ? "" : "M",
                    std::to_string(p.points), std::to_string(p.solo_level),
                    fixed(p.difficulty, 2), join(p.ilo_refs, ",")});
  }
  print_table(out, rows);
  print_metrics(out, st.draft->metrics, s.blueprint.target_points);
}

// ---- commands -------------------------------------------------------------

int cmd_bank_validate(const Options& o, std::ostream& out) {
  ValidationReport report;
  Bank bank = load_bank_collecting(o.bank_path, report);
  const ValidationReport more = validate_bank(bank);
  auto merge = [](std::vector<ValidationIssue>& into, const std::vector<ValidationIssue>& from) {
    for (const auto& i : from) {
      const bool dup = std::any_of(into.begin(), into.end(), [&](const ValidationIssue& x) {
        return x.rule == i.rule && x.problem_id == i.problem_id;
      });
      if (!dup) into.push_back(i);
    }
  };
  merge(report.errors, more.errors);
  merge(report.warnings, more.warnings);

  if (json_output(o)) {
    Json j = to_json(report);
    j["problems"] = bank.problems.size();
    out << j.dump(2) << "\n";
  } else {
    out << o.bank_path << ": " << bank.problems.size() << " problem(s), "
        << report.errors.size() << " error(s), " << report.warnings.size() << " warning(s)\n";
    std::vector<std::vector<std::string>> rows{{"level", "problem", "rule", "message"}};
    for (const auto& e : report.errors) rows.push_back({"error", e.problem_id.value_or("-"), e.rule, e.message});
    for (const auto& w : report.warnings) rows.push_back({"warning", w.problem_id.value_or("-"), w.rule, w.message});
    if (rows.size() > 1) print_table(out, rows);
  }
  return report.ok() ? kExitOk : kExitDomain;
}

int cmd_bank_list(const Options& o, std::ostream& out) {
  const Bank bank = load_bank(o.bank_path);
  require_valid(bank);
  ProblemFilter f;
  if (!o.subarea.empty()) f.subarea = o.subarea;
  if (!o.ilo.empty()) f.ilo = o.ilo;
  if (o.solo > 0) f.solo_level = o.solo;
  if (!o.unused_since.empty()) f.unused_since = Date::parse(o.unused_since);
  const auto problems = query_problems(bank, f);
  if (json_output(o)) {
    Json list = Json::array();
    for (const auto& p : problems) list.push_back(problem_json(p));
    out << Json{{"problems", list}}.dump(2) << "\n";
    return kExitOk;
  }
  std::vector<std::vector<std::string>> rows{
      {"problem", "subarea", "points", "SOLO", "difficulty", "last used", "ILOs"}};
  for (const auto& p : problems) {
    rows.push_back({p.id, p.subarea, std::to_string(p.points), std::to_string(p.solo_level),
                    fixed(p.difficulty, 2), p.last_used() ? p.last_used()->to_string() : "-",
                    join(p.ilo_refs, ",")});
  }
  print_table(out, rows);
  return kExitOk;
}

int cmd_exam_new(const Options& o, std::ostream& out) {
  Workspace ws(require_bank(o));
  std::vector<std::string> subareas;
  for (const auto& list : o.slot_lists) {
    for (const auto& code : split(list, ',')) {
      if (code.empty()) throw UsageError("empty subarea in --slot \"" + list + "\"");
      subareas.push_back(code);
    }
  }
  Date date;
  try {
    date = Date::parse(o.date);
  } catch (const Error& e) {
    throw UsageError(std::string("--date: ") + e.what());
  }
  Blueprint bp = Blueprint::from_subareas(subareas, o.points, date);
  bp.recency_window_days = o.recency_days;
  if (!o.difficulty.empty()) {
    const auto parts = split(o.difficulty, ':');
    try {
      if (parts.size() != 2) throw std::invalid_argument("");
      bp.difficulty_band = DifficultyBand{std::stod(parts[0]), std::stod(parts[1])};
    } catch (const std::exception&) {
      throw UsageError("--difficulty expects MIN:MAX, got \"" + o.difficulty + "\"");
    }
  }
  std::optional<std::uint64_t> seed;
  if (!o.seed.empty()) {
    try {
      seed = parse_seed(o.seed);
    } catch (const Error& e) {
      throw UsageError(std::string("--seed: ") + e.what());
    }
  }
  const Session s = ws.create_session(bp, seed, o.id);
  if (json_output(o)) {
    Json j;
    j["session_id"] = s.id;
    j["base_seed"] = seed_to_string(s.base_seed);
    j["bank_ref"] = s.bank_ref;
    j["blueprint"] = to_json(s.blueprint);
    out << j.dump(2) << "\n";
  } else {
    out << "session " << s.id << "\n";
    out << "base seed " << s.base_seed << "\n";
    out << "slots " << bp.slots.size() << " (" << join(subareas, ",") << ")  target "
        << bp.target_points << " points  exam date " << bp.exam_date.to_string()
        << "  recency " << bp.recency_window_days << " days";
    if (bp.difficulty_band) {
      out << "  difficulty " << fixed(bp.difficulty_band->min, 2) << ".."
          << fixed(bp.difficulty_band->max, 2);
    }
    out << "\n";
  }
  return kExitOk;
}

int cmd_exam_step(const Options& o, std::ostream& out) {
  const SessionRef ref = resolve_session(o);
  std::vector<std::pair<int, std::string>> pins;
  for (const auto& spec : o.pins) {
    const auto eq = spec.find('=');
    int slot = 0;
    try {
      std::size_t used = 0;
      slot = std::stoi(spec.substr(0, eq), &used);
      if (eq == std::string::npos || used != eq || eq + 1 >= spec.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw UsageError("--pin expects SLOT=PROBLEM_ID, got \"" + spec + "\"");
    }
    pins.emplace_back(slot, spec.substr(eq + 1));
  }

  Workspace ws(ref.bank_dir);
  const Session s = ws.run_step(ref.id, [&](const Session& current, const Bank& bank) {
    DecisionVector dv = current.latest_decision_vector();
    for (int slot : o.unpins) dv = unpin(dv, current.blueprint, slot);
    for (const auto& [slot, id] : pins) dv = pin(dv, current.blueprint, bank, slot, id);
    return dv;
  });
  const auto bank = ws.bank();
  if (json_output(o)) {
    out << step_json(s, s.steps.back(), *bank).dump(2) << "\n";
  } else {
    print_step(out, s, s.steps.back(), *bank);
  }
  return kExitOk;
}

int cmd_exam_accept(const Options& o, std::ostream& out) {
  const SessionRef ref = resolve_session(o);
  Workspace ws(ref.bank_dir);
  const auto [s, bank] = ws.accept(ref.id);
  const ExamDraft& d = *s.latest_draft();
  if (json_output(o)) {
    Json j;
    j["session_id"] = s.id;
    j["status"] = std::string(status_name(s.status));
    j["step_number"] = s.steps.back().step_number;
    j["draft"] = to_json(d);
    j["exam_date"] = s.blueprint.exam_date.to_string();
    out << j.dump(2) << "\n";
  } else {
    out << "accepted session " << s.id << " (step " << s.steps.back().step_number << "): "
        << d.assignment.size() << " problem(s) recorded as used on "
        << s.blueprint.exam_date.to_string() << "\n";
    out << "problems " << join(d.assignment, ", ") << "\n";
  }
  return kExitOk;
}

int cmd_exam_abandon(const Options& o, std::ostream& out) {
  const SessionRef ref = resolve_session(o);
  Workspace ws(ref.bank_dir);
  const Session s = ws.abandon(ref.id);
  if (json_output(o)) {
    out << Json{{"session_id", s.id}, {"status", std::string(status_name(s.status))}}.dump(2) << "\n";
  } else {
    out << "abandoned session " << s.id << "\n";
  }
  return kExitOk;
}

int cmd_exam_history(const Options& o, std::ostream& out) {
  const SessionRef ref = resolve_session(o);
  Workspace ws(ref.bank_dir);
  const Session s = ws.load_session(ref.id);
  if (json_output(o)) {
    out << session_json(s, *ws.bank()).dump(2) << "\n";
    return kExitOk;
  }
  out << "session " << s.id << "  status " << status_name(s.status) << "  base seed "
      << s.base_seed << "  target " << s.blueprint.target_points << " points\n";
  std::vector<std::vector<std::string>> rows{
      {"step", "decision vector", "outcome", "points", "difficulty", "problems"}};
  for (const auto& h : history(s)) {
    rows.push_back({std::to_string(h.step_number), h.decision_vector, h.outcome,
                    h.metrics ? std::to_string(h.metrics->total_points) : "-",
                    h.metrics ? fixed(h.metrics->weighted_difficulty, 4) : "-",
                    join(h.assignment, ",")});
  }
  print_table(out, rows);
  return kExitOk;
}

int cmd_exam_replay(const Options& o, std::ostream& out) {
  const SessionRef ref = resolve_session(o);
  Workspace ws(ref.bank_dir);
  const Session s = ws.load_session(ref.id);
  const Bank bank = o.snapshot.empty() ? *ws.bank() : load_bank(o.snapshot);
  const auto mismatches = replay_mismatches(s, bank);
  if (json_output(o)) {
    out << Json{{"session_id", s.id}, {"steps", s.steps.size()}, {"mismatches", mismatches}}.dump(2)
        << "\n";
  } else {
    out << "replayed " << s.steps.size() << " step(s) of session " << s.id << ": "
        << (mismatches.empty() ? "identical" : std::to_string(mismatches.size()) + " mismatch(es)")
        << "\n";
    for (const auto& m : mismatches) out << "  " << m << "\n";
  }
  return mismatches.empty() ? kExitOk : kExitDomain;
}

int cmd_exam_render(const Options& o, std::ostream& out, std::ostream& err) {
  const SessionRef ref = resolve_session(o);
  Workspace ws(ref.bank_dir);
  const Session s = ws.load_session(ref.id);
  std::vector<DocKind> kinds{DocKind::kExam};
  if (o.solutions) kinds.push_back(DocKind::kSolutions);

  std::vector<RenderedDoc> docs;
  for (DocKind kind : kinds) docs.push_back(ws.render(s, kind));

  fs::create_directories(o.out_dir);
  std::vector<std::string> files;
  for (const auto& doc : docs) {
    const std::string file = output_file_name(o.name, doc.kind);
    std::ofstream f(fs::path(o.out_dir) / file, std::ios::binary | std::ios::trunc);
    f << doc.content;
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + (fs::path(o.out_dir) / file).string());
    for (const auto& w : doc.warnings) err << "warning: " << w << "\n";
    files.push_back(file);
  }
  if (json_output(o)) {
    out << Json{{"session_id", s.id}, {"out_dir", o.out_dir}, {"files", files}}.dump(2) << "\n";
  } else {
    for (const auto& f : files) out << "wrote " << (fs::path(o.out_dir) / f).string() << "\n";
  }

  if (!o.compile.empty()) {
    for (const auto& f : files) {
      out.flush();
      const std::string command =
          "cd " + shell_quote(o.out_dir) + " && " + o.compile + " " + shell_quote(f);
      const int status = std::system(command.c_str());
      const int code = status == -1 ? 127 : (WIFEXITED(status) ? WEXITSTATUS(status) : 128);
      if (code != 0) {
        err << "compile command failed for " << f << " (exit " << code << ")\n";
        return code;
      }
    }
  }
  return kExitOk;
}

HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
  const fs::path bank_dir = require_bank(o);
  const auto colon = o.listen.rfind(':');
  int port = -1;
  try {
    if (colon == std::string::npos) throw std::invalid_argument("");
    port = std::stoi(o.listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("--listen expects ADDR:PORT, got \"" + o.listen + "\"");
  }
  const std::string host = o.listen.substr(0, colon);

  Service service(bank_dir);
  require_valid(*service.workspace().bank());
  HttpServer server(service);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    err << "cannot listen on " << o.listen << "\n";
    return kExitDomain;
  }
  out << "serving bank " << bank_dir.string() << " on http://" << host << ":" << bound << "\n";
  out.flush();
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.listen_after_bind();
  g_server = nullptr;
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"examforge: assemble written examinations from a tagged problem bank"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  auto add_bank_opt = [&](CLI::App* cmd) {
    cmd->add_option("--bank", o.bank, "Bank directory")->envname(kBankEnvVar);
  };

  auto* bank = app.add_subcommand("bank", "Inspect a problem bank");
  bank->require_subcommand(1);
  auto* validate = bank->add_subcommand("validate", "Check a bank; exit 0 iff it has no errors");
  validate->add_option("path", o.bank_path, "Bank directory or bank.json")->required();
  auto* list = bank->add_subcommand("list", "List problems matching a filter");
  list->add_option("path", o.bank_path, "Bank directory or bank.json")->required();
  list->add_option("--subarea", o.subarea, "Subarea code");
  list->add_option("--unused-since", o.unused_since, "Only problems unused on/after YYYY-MM-DD");
  list->add_option("--ilo", o.ilo, "ILO identifier");
  list->add_option("--solo", o.solo, "SOLO level")->check(CLI::Range(1, 5));

  auto* exam = app.add_subcommand("exam", "Run the stepwise alignment loop");
  exam->require_subcommand(1);

  auto* create = exam->add_subcommand("new", "Start a session; prints its id and base seed");
  add_bank_opt(create);
  create->add_option("--points", o.points, "Exact total point target")
      ->required()
      ->check(CLI::PositiveNumber);
  create->add_option("--slot", o.slot_lists,
                     "Comma-separated subarea per slot; repeat a code for several problems")
      ->required();
  create->add_option("--date", o.date, "Exam date YYYY-MM-DD")->required();
  create->add_option("--seed", o.seed, "Base seed (decimal); random when omitted");
  create->add_option("--recency-days", o.recency_days, "Recency window in days (0 disables)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  create->add_option("--difficulty", o.difficulty, "Weighted difficulty band MIN:MAX");
  create->add_option("--id", o.id, "Session id (derived from the seed by default)");

  auto* step_cmd = exam->add_subcommand("step", "Sample the next draft");
  add_bank_opt(step_cmd);
  step_cmd->add_option("session", o.session, "Session id or transcript path")->required();
  step_cmd->add_option("--pin", o.pins, "Pin SLOT=PROBLEM_ID (repeatable)");
  step_cmd->add_option("--unpin", o.unpins, "Return SLOT to random (repeatable)");

  auto* accept_cmd = exam->add_subcommand("accept", "Commit the latest draft to the bank");
  add_bank_opt(accept_cmd);
  accept_cmd->add_option("session", o.session, "Session id or transcript path")->required();

  auto* abandon_cmd = exam->add_subcommand("abandon", "Close a session without committing");
  add_bank_opt(abandon_cmd);
  abandon_cmd->add_option("session", o.session, "Session id or transcript path")->required();

  auto* history_cmd = exam->add_subcommand("history", "Show all steps of a session");
  add_bank_opt(history_cmd);
  history_cmd->add_option("session", o.session, "Session id or transcript path")->required();

  auto* replay_cmd = exam->add_subcommand("replay", "Re-run a transcript and compare drafts");
  add_bank_opt(replay_cmd);
  replay_cmd->add_option("session", o.session, "Session id or transcript path")->required();
  replay_cmd->add_option("--snapshot", o.snapshot, "Replay against this bank copy instead");

  auto* render_cmd = exam->add_subcommand("render", "Write the LaTeX documents of the latest draft");
  add_bank_opt(render_cmd);
  render_cmd->add_option("session", o.session, "Session id or transcript path")->required();
  render_cmd->add_option("--out", o.out_dir, "Output directory")->required();
  render_cmd->add_flag("--solutions", o.solutions, "Also write the solutions document");
  render_cmd->add_option("--compile", o.compile, "TeX command run on each written file");
  render_cmd->add_option("--name", o.name, "Base file name")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  add_bank_opt(serve);
  serve->add_option("--listen", o.listen, "ADDR:PORT")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_bank_validate(o, out);
    if (*list) return cmd_bank_list(o, out);
    if (*create) return cmd_exam_new(o, out);
    if (*step_cmd) return cmd_exam_step(o, out);
    if (*accept_cmd) return cmd_exam_accept(o, out);
    if (*abandon_cmd) return cmd_exam_abandon(o, out);
    if (*history_cmd) return cmd_exam_history(o, out);
    if (*replay_cmd) return cmd_exam_replay(o, out);
    if (*render_cmd) return cmd_exam_render(o, out, err);
    if (*serve) return cmd_serve(o, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << machine_code(e.code()) << "]: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace examforge::cli
