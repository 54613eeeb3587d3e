#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "examforge/bank.hpp"
#include "examforge/selector.hpp"

namespace examforge {

struct CourseMeta {
  std::string course_title;
  std::string course_code;
  std::string exam_date;
  std::string instructions_text;
  std::string points_summary_note;
  // Replaces the built-in preamble (everything before \begin{document}).
  std::optional<std::string> preamble;
};

// Reads course metadata from a JSON file with optional keys course_title,
// course_code, exam_date, instructions_text, points_summary_note and
// preamble_path (relative to the file).
CourseMeta load_course_meta(const std::filesystem::path& path);

enum class DocKind { kExam, kSolutions };

std::string_view doc_kind_name(DocKind kind);
DocKind parse_doc_kind(std::string_view name);

struct RenderedDoc {
  DocKind kind = DocKind::kExam;
  std::string content;
  std::vector<std::string> warnings;
};

std::string_view default_preamble();

// Escapes # $ % & _ { } ~ ^ \ for use in running text:
//   # $ % & _ { }  ->  \# \$ \% \& \_ \{ \}
//   ~ -> \textasciitilde{}   ^ -> \textasciicircum{}   \ -> \textbackslash{}
std::string escape_text(std::string_view text);

// Full standalone LaTeX sources. Metadata is escaped; fragments are inserted
// verbatim (CRLF normalized to LF). Byte-deterministic for fixed inputs.
RenderedDoc render_exam(const ExamDraft& draft, const Bank& bank, const CourseMeta& meta);
RenderedDoc render_solutions(const ExamDraft& draft, const Bank& bank, const CourseMeta& meta);
RenderedDoc render(DocKind kind, const ExamDraft& draft, const Bank& bank, const CourseMeta& meta);

// `<exam_id>.tex` or `<exam_id>-solutions.tex`.
std::string output_file_name(const std::string& exam_id, DocKind kind);

}  // namespace examforge
