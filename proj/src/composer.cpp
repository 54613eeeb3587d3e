#include "examforge/composer.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace examforge {

namespace {

constexpr std::string_view kDefaultPreamble =
    "\\documentclass[11pt,a4paper]{article}\n"
    "\\usepackage[T1]{fontenc}\n"
    "\\usepackage[utf8]{inputenc}\n"
    "\\usepackage{amsmath,amssymb}\n"
    "\\usepackage{graphicx}\n"
    "\\usepackage[margin=25mm]{geometry}\n"
    "\\setlength{\\parindent}{0pt}\n"
    "\\setlength{\\parskip}{0.6em}\n";

std::string normalize_newlines(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
    out += text[i];
  }
  if (!out.empty() && out.back() != '\n') out += '\n';
  return out;
}

bool is_blank(std::string_view text) {
  return text.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::string points_label(int points) {
  return std::to_string(points) + (points == 1 ? " point" : " points");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RenderedDoc render_document(DocKind kind, const ExamDraft& draft, const Bank& bank,
                            const CourseMeta& meta) {
  if (meta.course_title.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "course title must not be empty");
  }
  std::vector<const Problem*> problems;
  int total = 0;
  for (const auto& id : draft.assignment) {
    problems.push_back(&bank.at(id));
    total += problems.back()->points;
  }
  if (total != draft.metrics.total_points) {
    throw Error(ErrorCode::kInvalidArgument,
                "draft metrics report " + std::to_string(draft.metrics.total_points) +
                    " points but the bank gives " + std::to_string(total));
  }

  RenderedDoc doc;
  doc.kind = kind;
  const bool solutions = kind == DocKind::kSolutions;
  std::string out;
  out += "% Generated by examforge.\n";
  out += normalize_newlines(meta.preamble ? *meta.preamble : std::string(kDefaultPreamble));
  out += "\n\\begin{document}\n\n";
  out += "\\begin{center}\n";
  out += "{\\Large\\bfseries " + escape_text(meta.course_title) + "}\\\\[0.5ex]\n";
  if (solutions) out += "{\\large Solutions}\\\\[0.5ex]\n";
  if (!meta.course_code.empty()) out += escape_text(meta.course_code) + "\\\\\n";
  if (!meta.exam_date.empty()) out += escape_text(meta.exam_date) + "\n";
  out += "\\end{center}\n\n";
  if (!solutions && !meta.instructions_text.empty()) {
    out += escape_text(meta.instructions_text) + "\n\n";
  }
  out += "Total: " + std::to_string(total) + " points.";
  if (!meta.points_summary_note.empty()) out += " " + escape_text(meta.points_summary_note);
  out += "\n";

  for (std::size_t k = 0; k < problems.size(); ++k) {
    const Problem& p = *problems[k];
    out += "\n\\section*{" + std::string(solutions ? "Solution " : "Problem ") +
           std::to_string(k + 1) + " (" + points_label(p.points) + ")}\n";
    const std::string body = read_fragment(bank, p, solutions);
    if (is_blank(body)) {
      if (solutions) {
        out += "Solution not provided.\n";
        doc.warnings.push_back("problem \"" + p.id + "\" has an empty solution fragment");
      } else {
        doc.warnings.push_back("problem \"" + p.id + "\" has an empty statement fragment");
      }
    } else {
      out += normalize_newlines(body);
    }
  }
  out += "\n\\end{document}\n";
  doc.content = std::move(out);
  return doc;
}

}  // namespace

CourseMeta load_course_meta(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
  CourseMeta meta;
  auto text = [&](const char* key, std::string& out) {
    if (auto it = j.find(key); it != j.end() && it->is_string()) out = it->get<std::string>();
  };
  text("course_title", meta.course_title);
  text("course_code", meta.course_code);
  text("exam_date", meta.exam_date);
  text("instructions_text", meta.instructions_text);
  text("points_summary_note", meta.points_summary_note);
  std::string preamble_path;
  text("preamble_path", preamble_path);
  if (!preamble_path.empty()) meta.preamble = read_text(path.parent_path() / preamble_path);
  return meta;
}

std::string_view doc_kind_name(DocKind kind) {
  return kind == DocKind::kExam ? "exam" : "solutions";
}

DocKind parse_doc_kind(std::string_view name) {
  if (name == "exam") return DocKind::kExam;
  if (name == "solutions") return DocKind::kSolutions;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown document kind \"" + std::string(name) + "\" (exam|solutions)");
}

std::string_view default_preamble() { return kDefaultPreamble; }

std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '#': case '$': case '%': case '&': case '_': case '{': case '}':
        out += '\\';
        out += c;
        break;
      case '~': out += "\\textasciitilde{}"; break;
      case '^': out += "\\textasciicircum{}"; break;
      case '\\': out += "\\textbackslash{}"; break;
      default: out += c;
    }
  }
  return out;
}

RenderedDoc render_exam(const ExamDraft& draft, const Bank& bank, const CourseMeta& meta) {
  return render_document(DocKind::kExam, draft, bank, meta);
}

RenderedDoc render_solutions(const ExamDraft& draft, const Bank& bank, const CourseMeta& meta) {
  return render_document(DocKind::kSolutions, draft, bank, meta);
}

RenderedDoc render(DocKind kind, const ExamDraft& draft, const Bank& bank, const CourseMeta& meta) {
  return render_document(kind, draft, bank, meta);
}

std::string output_file_name(const std::string& exam_id, DocKind kind) {
  return exam_id + (kind == DocKind::kSolutions ? "-solutions.tex" : ".tex");
}

}  // namespace examforge
