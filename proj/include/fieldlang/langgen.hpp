#pragma once

// Structured text over an AnalysisReport: the question bank, deterministic
// answer templates and the Human/Assistant training-record line format.

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "fieldlang/codec.hpp"
#include "fieldlang/features.hpp"

namespace fieldlang {

enum class Task { Categorize, Reynolds, Vortex, FieldAnalysis };

inline constexpr Task kAllTasks[] = {Task::Categorize, Task::Reynolds, Task::Vortex, Task::FieldAnalysis};

inline const char* to_string(Task t) {
  switch (t) {
    case Task::Categorize: return "categorize";
    case Task::Reynolds: return "reynolds";
    case Task::Vortex: return "vortex";
    case Task::FieldAnalysis: return "field-analysis";
  }
  return "categorize";
}

inline Task parse_task(std::string_view s) {
  for (Task t : kAllTasks)
    if (s == to_string(t)) return t;
  throw Error(ErrorKind::InvalidArgument, "unknown task '" + std::string(s) + "'");
}

struct Question {
  std::string id;
  Task task = Task::Categorize;
  std::string text;
};

inline constexpr int kQuestionBankVersion = 1;

inline std::vector<Question> question_bank(Task task) {
  std::vector<std::string> texts;
  switch (task) {
    case Task::Categorize:
      texts = {"Judge the type of flow field based on the coupled effect of velocity field and pressure field.",
               "What type of flow does this velocity-pressure field represent?",
               "Classify this flow field and list the evidence supporting the classification."};
      break;
    case Task::Reynolds:
      texts = {"Estimate the Reynolds number of this flow field.",
               "What is the Reynolds number of this flow, and which regime does it fall into?",
               "Compute the Reynolds number from the fluid properties of this field."};
      break;
    case Task::Vortex:
      texts = {"Please analyze the detailed parameters of all vortex structures.",
               "How many vortices are present, and what are their positions, sizes, circulations and rotation "
               "directions?",
               "Identify the coherent vortex structures in this field."};
      break;
    case Task::FieldAnalysis:
      texts = {"Identify the peak velocity and its location, and describe the pressure extrema.",
               "Where is the maximum velocity in this field and what is its value?",
               "Describe the key velocity, pressure and vorticity values of this field."};
      break;
  }
  std::vector<Question> bank;
  for (std::size_t i = 0; i < texts.size(); ++i)
    bank.push_back({std::string(to_string(task)) + "-" + std::to_string(i + 1), task, texts[i]});
  return bank;
}

inline std::vector<Question> question_bank(std::string_view task) { return question_bank(parse_task(task)); }

// ---------------------------------------------------------------------------
// Number formatting

/// Two decimals, with negative zero printed as "0.00".
inline std::string fixed2(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string short_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

namespace detail {

inline std::string count_phrase(std::size_t n) {
  static const char* words[] = {"Zero", "One", "Two",   "Three", "Four",   "Five",  "Six",
                                "Seven", "Eight", "Nine", "Ten",   "Eleven", "Twelve"};
  if (n == 0) return "0 vortices were detected";
  const std::string count = n < std::size(words) ? words[n] : std::to_string(n);
  return count + (n == 1 ? " vortex was detected" : " vortices were detected");
}

inline std::string display_name(FlowLabel label) {
  switch (label) {
    case FlowLabel::LidDrivenCavity: return "Lid-Driven Cavity Flow";
    case FlowLabel::BluffBodyWake: return "Bluff-Body Wake Flow";
    case FlowLabel::Channel: return "Channel Flow";
    case FlowLabel::VortexArray: return "Vortex Array";
    case FlowLabel::Uniform: return "Uniform Flow";
    case FlowLabel::Unknown: return "Unknown Flow Type";
  }
  return "Unknown Flow Type";
}

inline std::string article_phrase(FlowLabel label) {
  switch (label) {
    case FlowLabel::LidDrivenCavity: return "a lid-driven cavity flow";
    case FlowLabel::BluffBodyWake: return "a bluff-body wake with alternating vortex shedding";
    case FlowLabel::Channel: return "a unidirectional channel flow";
    case FlowLabel::VortexArray: return "a periodic array of counter-rotating vortices";
    case FlowLabel::Uniform: return "a uniform flow";
    case FlowLabel::Unknown: return "an unclassified flow";
  }
  return "an unclassified flow";
}

inline std::string opposite_wall(const std::string& wall) {
  if (wall == "top") return "bottom";
  if (wall == "bottom") return "top";
  if (wall == "left") return "right";
  return "left";
}

inline std::string location(Point p) { return "X=" + fixed2(p.x) + ", Y=" + fixed2(p.y); }

}  // namespace detail

/// "<N> vortices were detected, vortex 1: [length .., height .., circulation
/// .., coordinates (x,y), rotation direction: ..] vortex 2: [..]".
inline std::string render_vortex_answer(const AnalysisReport& report) {
  std::string out = detail::count_phrase(report.vortices.size());
  for (std::size_t i = 0; i < report.vortices.size(); ++i) {
    const auto& v = report.vortices[i];
    out += i == 0 ? ", " : " ";
    out += "vortex " + std::to_string(i + 1) + ": [length " + fixed2(v.length) + ", height " + fixed2(v.height) +
           ", circulation " + fixed2(v.circulation) + ", coordinates (" + fixed2(v.center.x) + "," +
           fixed2(v.center.y) + "), rotation direction: " + to_string(v.direction) + "]";
  }
  return out;
}

inline std::string render_classification_answer(const AnalysisReport& report) {
  const auto& flow = report.flow;
  std::string out = detail::display_name(flow.label) + ". ";
  if (flow.label == FlowLabel::Unknown)
    out += "No rule of the classification cascade matched this field (label: unknown). Measured quantities: ";
  else
    out += "The rule cascade classifies this field as " + detail::article_phrase(flow.label) +
           " (label: " + to_string(flow.label) + "). Evidence: ";
  if (flow.label == FlowLabel::LidDrivenCavity && flow.driving_wall) {
    out += "the velocity field shows a strong shear layer at the " +
           *flow.driving_wall + " and recirculation zones at the " + detail::opposite_wall(*flow.driving_wall) +
           "; ";
  }
  for (std::size_t i = 0; i < flow.evidence.size(); ++i) {
    const auto& e = flow.evidence[i];
    if (i) out += "; ";
    out += e.feature + " = " + short_number(e.value) + " (" + e.rule + " rule " +
           (e.fired ? "fired" : "not fired") + ")";
  }
  out += ".";
  return out;
}

inline std::string render_field_analysis_answer(const AnalysisReport& report) {
  return "The peak velocity value is " + fixed2(report.u_max.value) + " m/s at " +
         detail::location(report.u_max.location) + ". The maximum pressure is " + fixed2(report.p_max.value) +
         " at " + detail::location(report.p_max.location) + " and the minimum pressure is " +
         fixed2(report.p_min.value) + " at " + detail::location(report.p_min.location) +
         ". The maximum vorticity magnitude is " + fixed2(report.max_abs_vorticity.value) + " 1/s at " +
         detail::location(report.max_abs_vorticity.location) + ".";
}

inline constexpr double kLaminarReynoldsLimit = 2000.0;

inline std::string render_reynolds_answer(const AnalysisReport& report) {
  std::string out = "The Reynolds number is Re = " + fixed2(report.reynolds) + " (Re = rho*U*L/mu). ";
  if (report.reynolds < kLaminarReynoldsLimit)
    out += "The flow is laminar (Re < 2000).";
  else
    out += "The flow is transitional or turbulent (Re >= 2000).";
  return out;
}

inline std::string render_answer(Task task, const AnalysisReport& report) {
  switch (task) {
    case Task::Categorize: return render_classification_answer(report);
    case Task::Reynolds: return render_reynolds_answer(report);
    case Task::Vortex: return render_vortex_answer(report);
    case Task::FieldAnalysis: return render_field_analysis_answer(report);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Training records:  Human: <field_ref>, <question> <STOP> Assistant: <answer>

inline constexpr std::string_view kHumanPrefix = "Human: ";
inline constexpr std::string_view kFieldSeparator = ", ";
inline constexpr std::string_view kStopSeparator = " <STOP> Assistant: ";

struct TrainingRecord {
  std::string field_ref;
  std::string question;
  std::string answer;

  friend bool operator==(const TrainingRecord&, const TrainingRecord&) = default;
};

/// Token sequence as "[t1 t2 ...]".
inline std::string format_field_ref(const TokenSequence& seq) {
  std::string out = "[";
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += std::to_string(seq.tokens[i]);
  }
  out.push_back(']');
  return out;
}

inline std::string emit_training_record(const std::string& field_ref, const std::string& question,
                                        const std::string& answer) {
  const std::pair<const char*, const std::string*> parts[] = {
      {"field reference", &field_ref}, {"question", &question}, {"answer", &answer}};
  for (const auto& [name, text] : parts) {
    if (text->empty()) throw Error(ErrorKind::InvalidRecord, std::string(name) + " is empty");
    if (text->find_first_of("\r\n") != std::string::npos)
      throw Error(ErrorKind::InvalidRecord, std::string(name) + " contains a line break");
  }
  if (field_ref.find(kFieldSeparator) != std::string::npos)
    throw Error(ErrorKind::InvalidRecord, "field reference must not contain ', '");
  if (question.find(kStopSeparator) != std::string::npos)
    throw Error(ErrorKind::InvalidRecord, "question must not contain the <STOP> separator");
  std::string out;
  out.reserve(kHumanPrefix.size() + field_ref.size() + question.size() + answer.size() + 24);
  out += kHumanPrefix;
  out += field_ref;
  out += kFieldSeparator;
  out += question;
  out += kStopSeparator;
  out += answer;
  return out;
}

inline std::string emit_training_record(const TrainingRecord& r) {
  return emit_training_record(r.field_ref, r.question, r.answer);
}

inline TrainingRecord parse_training_record(std::string_view line) {
  if (line.find_first_of("\r\n") != std::string_view::npos)
    throw Error(ErrorKind::InvalidRecord, "record spans more than one line");
  if (!line.starts_with(kHumanPrefix)) throw Error(ErrorKind::InvalidRecord, "record must start with 'Human: '");
  line.remove_prefix(kHumanPrefix.size());
  const auto comma = line.find(kFieldSeparator);
  if (comma == std::string_view::npos) throw Error(ErrorKind::InvalidRecord, "missing ', ' after the field reference");
  TrainingRecord r;
  r.field_ref = std::string(line.substr(0, comma));
  line.remove_prefix(comma + kFieldSeparator.size());
  const auto stop = line.find(kStopSeparator);
  if (stop == std::string_view::npos) throw Error(ErrorKind::InvalidRecord, "missing '<STOP> Assistant:' separator");
  r.question = std::string(line.substr(0, stop));
  r.answer = std::string(line.substr(stop + kStopSeparator.size()));
  if (r.field_ref.empty() || r.question.empty() || r.answer.empty())
    throw Error(ErrorKind::InvalidRecord, "record has an empty part");
  return r;
}

}  // namespace fieldlang
