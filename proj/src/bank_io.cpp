#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "examforge/bank.hpp"
#include "examforge/error.hpp"
#include "examforge/file_lock.hpp"

namespace examforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kTopLevelKeys = {"schema_version", "subareas", "problems"};
const std::vector<std::string> kProblemKeys = {
    "id",           "subarea",        "points",        "ilo_refs",   "solo_level",
    "difficulty",   "statement_path", "solution_path", "usage_dates"};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kBankLoad, where + ": " + what);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kBankLoad, path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const json& require_key(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing required key \"" + key + "\"");
  return *it;
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  const auto n = v.get<long long>();
  if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
    fail(where, "integer out of range");
  }
  return static_cast<int>(n);
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

Problem parse_problem(const json& obj, const std::string& where, const fs::path& root,
                      std::vector<UnknownKey>& unknown, ValidationReport& issues) {
  if (!obj.is_object()) fail(where, "expected an object");
  Problem p;
  p.id = as_string(require_key(obj, "id", where), where + ".id");
  const std::string at = where + " (id \"" + p.id + "\")";
  p.subarea = as_string(require_key(obj, "subarea", at), at + ".subarea");
  p.points = as_int(require_key(obj, "points", at), at + ".points");
  const json& ilos = require_key(obj, "ilo_refs", at);
  if (!ilos.is_array()) fail(at + ".ilo_refs", "expected an array");
  for (const auto& ilo : ilos) p.ilo_refs.push_back(as_string(ilo, at + ".ilo_refs[]"));
  p.solo_level = as_int(require_key(obj, "solo_level", at), at + ".solo_level");
  const json& diff = require_key(obj, "difficulty", at);
  if (!diff.is_number()) fail(at + ".difficulty", "expected a number");
  p.difficulty = diff.get<double>();
  p.statement_path = as_string(require_key(obj, "statement_path", at), at + ".statement_path");
  p.solution_path = as_string(require_key(obj, "solution_path", at), at + ".solution_path");
  const json& dates = require_key(obj, "usage_dates", at);
  if (!dates.is_array()) fail(at + ".usage_dates", "expected an array");
  for (const auto& d : dates) {
    try {
      p.usage_dates.push_back(Date::parse(as_string(d, at + ".usage_dates[]")));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kBankLoad) throw;
      fail(at + ".usage_dates", e.what());
    }
  }

  for (const auto& [key, _] : obj.items()) {
    if (std::find(kProblemKeys.begin(), kProblemKeys.end(), key) == kProblemKeys.end()) {
      unknown.push_back({p.id, key});
    }
  }

  for (const auto* field : {&p.statement_path, &p.solution_path}) {
    const fs::path rel(*field);
    const std::string name = field == &p.statement_path ? "statement_path" : "solution_path";
    if (rel.empty() || rel.is_absolute()) {
      fail(at + "." + name, "fragment path must be a non-empty relative path");
    }
    if (!fs::is_regular_file(root / rel)) {
      issues.errors.push_back({p.id, "dangling_fragment",
                               at + "." + name + ": dangling fragment \"" + *field +
                                   "\" (file not found)"});
    }
  }
  return p;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Bank load_bank_collecting(const fs::path& path, ValidationReport& issues) {
  fs::path manifest = path;
  if (fs::is_directory(path)) manifest = path / kManifestName;
  if (!fs::exists(manifest)) {
    throw Error(ErrorCode::kBankLoad, manifest.string() + ": file not found");
  }
  const std::string where = manifest.filename().string();

  json doc;
  try {
    doc = json::parse(read_file(manifest));
  } catch (const json::parse_error& e) {
    fail(where, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(where, "top level must be an object");

  Bank bank;
  bank.root = manifest.parent_path();
  bank.schema_version = as_int(require_key(doc, "schema_version", where), where + ".schema_version");
  if (bank.schema_version != kSchemaVersion) {
    fail(where + ".schema_version",
         "unknown schema_version " + std::to_string(bank.schema_version) + " (supported: " +
             std::to_string(kSchemaVersion) + ")");
  }
  for (const auto& [key, _] : doc.items()) {
    if (!kTopLevelKeys.count(key)) bank.unknown_keys.push_back({std::nullopt, key});
  }

  const json& subareas = require_key(doc, "subareas", where);
  if (!subareas.is_object()) fail(where + ".subareas", "expected an object");
  for (const auto& [code, title] : subareas.items()) {
    bank.subareas[code] = as_string(title, where + ".subareas." + code);
  }

  const json& problems = require_key(doc, "problems", where);
  if (!problems.is_array()) fail(where + ".problems", "expected an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const std::string at = where + ".problems[" + std::to_string(i) + "]";
    Problem p = parse_problem(problems[i], at, bank.root, bank.unknown_keys, issues);
    if (!ids.insert(p.id).second) {
      issues.errors.push_back({p.id, "duplicate_id", at + ": duplicate id \"" + p.id + "\""});
    }
    bank.problems.push_back(std::move(p));
  }
  bank.rebuild_index();
  return bank;
}

Bank load_bank(const fs::path& path) {
  ValidationReport issues;
  Bank bank = load_bank_collecting(path, issues);
  if (!issues.errors.empty()) throw Error(ErrorCode::kBankLoad, issues.errors.front().message);
  return bank;
}

std::string serialize_manifest(const Bank& bank) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = bank.schema_version;
  nlohmann::ordered_json subareas = nlohmann::ordered_json::object();
  for (const auto& [code, title] : bank.subareas) subareas[code] = title;
  doc["subareas"] = std::move(subareas);
  nlohmann::ordered_json problems = nlohmann::ordered_json::array();
  for (const auto& p : bank.problems) {
    nlohmann::ordered_json o;
    o["id"] = p.id;
    o["subarea"] = p.subarea;
    o["points"] = p.points;
    o["ilo_refs"] = p.ilo_refs;
    o["solo_level"] = p.solo_level;
    o["difficulty"] = p.difficulty;
    o["statement_path"] = p.statement_path;
    o["solution_path"] = p.solution_path;
    nlohmann::ordered_json dates = nlohmann::ordered_json::array();
    for (const auto& d : p.usage_dates) dates.push_back(d.to_string());
    o["usage_dates"] = std::move(dates);
    problems.push_back(std::move(o));
  }
  doc["problems"] = std::move(problems);
  return doc.dump(2) + "\n";
}

std::string bank_fingerprint(const Bank& bank) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_manifest(bank))));
  return buf;
}

void save_bank(const Bank& bank, const fs::path& dir) {
  DirectoryLock lock(dir);
  save_bank(bank, dir, lock);
}

void save_bank(const Bank& bank, const fs::path& dir, const DirectoryLock& held) {
  if (fs::weakly_canonical(held.dir()) != fs::weakly_canonical(dir)) {
    throw Error(ErrorCode::kInvalidArgument, "lock held on a different directory");
  }
  const std::string text = serialize_manifest(bank);
  const fs::path tmp = dir / (std::string(kManifestName) + ".tmp");
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  std::size_t written = 0;
  while (written < text.size()) {
    const ssize_t n = ::write(fd, text.data() + written, text.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, dir / kManifestName, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot replace manifest: " + ec.message());
}

std::string read_fragment(const Bank& bank, const Problem& problem, bool solution) {
  const fs::path path = bank.root / (solution ? problem.solution_path : problem.statement_path);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kMissingFragment,
                std::string(solution ? "solution" : "statement") + " fragment of problem \"" +
                    problem.id + "\" not found: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace examforge
