// record.hpp
//
// Tagged records describing distributions, e.g.
//   {family:"laplace", a:0.0, b:1.0}
//   {family:"mixture", weight:0.8, first:{family:"normal", a:0, b:1},
//    second:{family:"chisq1"}}
// Keys may be bare identifiers or quoted strings; values are numbers,
// strings, bare words or nested records.

#pragma once

#include <cctype>
#include <charconv>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>

#include "sdtest/distributions.hpp"
#include "sdtest/error.hpp"

namespace sdtest {

struct Record;

using RecordValue = std::variant<double, std::string, std::shared_ptr<Record>>;

struct Record {
  std::map<std::string, RecordValue> fields;

  bool has(const std::string& key) const { return fields.count(key) != 0; }

  double number(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw ParseError("record: missing numeric field '" + key + "'");
    if (const double* v = std::get_if<double>(&it->second)) return *v;
    throw ParseError("record: field '" + key + "' is not a number");
  }

  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::string text(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw ParseError("record: missing field '" + key + "'");
    if (const auto* v = std::get_if<std::string>(&it->second)) return *v;
    throw ParseError("record: field '" + key + "' is not a string");
  }

  const Record& child(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw ParseError("record: missing record field '" + key + "'");
    if (const auto* v = std::get_if<std::shared_ptr<Record>>(&it->second)) return **v;
    throw ParseError("record: field '" + key + "' is not a record");
  }
};

namespace detail {

class RecordParser {
 public:
  explicit RecordParser(std::string_view text) : text_(text) {}

  Record parse() {
    Record r = parse_record();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("record parse error at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == '+';
  }

  std::string parse_word() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && word_char(text_[pos_])) ++pos_;
    if (pos_ == start) fail("expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string parse_string() {
    const char quote = text_[pos_++];
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != quote) out.push_back(text_[pos_++]);
    if (pos_ == text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string parse_key() {
    skip_space();
    if (pos_ < text_.size() && (text_[pos_] == '"' || text_[pos_] == '\'')) return parse_string();
    return parse_word();
  }

  RecordValue parse_value() {
    skip_space();
    if (pos_ >= text_.size()) fail("expected value");
    const char c = text_[pos_];
    if (c == '{') return std::make_shared<Record>(parse_record());
    if (c == '"' || c == '\'') return parse_string();
    std::string word = parse_word();
    double v = 0.0;
    const char* first = word.data();
    const char* last = word.data() + word.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec == std::errc() && ptr == last) return v;
    return word;
  }

  Record parse_record() {
    if (!consume('{')) fail("expected '{'");
    Record r;
    if (consume('}')) return r;
    do {
      std::string key = parse_key();
      if (!consume(':')) fail("expected ':' after key '" + key + "'");
      if (r.fields.count(key)) fail("duplicate key '" + key + "'");
      r.fields.emplace(std::move(key), parse_value());
    } while (consume(','));
    if (!consume('}')) fail("expected ',' or '}'");
    return r;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Record parse_record(std::string_view text) { return detail::RecordParser(text).parse(); }

inline ContinuousDistribution distribution_from_record(const Record& r) {
  using D = ContinuousDistribution;
  const std::string fam = r.text("family");
  if (fam == "uniform" || fam == "uniform01") return D::uniform01();
  if (fam == "mu") return D::mu(r.number("a"));
  if (fam == "singh_maddala" || fam == "sm")
    return D::singh_maddala(r.number("a"), r.number("b"), r.number("c"));
  if (fam == "pareto") return D::pareto(r.number("a"));
  if (fam == "lognormal" || fam == "ln") return D::lognormal(r.number("a"), r.number("b"));
  if (fam == "normal") return D::normal(r.number_or("a", 0.0), r.number_or("b", 1.0));
  if (fam == "chisq1" || fam == "chi_square1") return D::chi_square1();
  if (fam == "laplace") return D::laplace(r.number("a"), r.number("b"));
  if (fam == "mixture")
    return D::mixture(r.number("weight"), distribution_from_record(r.child("first")),
                      distribution_from_record(r.child("second")));
  throw ParseError("unknown distribution family '" + fam + "'");
}

inline ContinuousDistribution parse_distribution(std::string_view text) {
  return distribution_from_record(parse_record(text));
}

/// Inverse of parse_distribution; numbers printed with 17 significant digits.
inline std::string to_record(const ContinuousDistribution& dist) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, family::Uniform01>) {
          os << "{family:\"uniform\"}";
        } else if constexpr (std::is_same_v<T, family::MU>) {
          os << "{family:\"mu\", a:" << d.a << "}";
        } else if constexpr (std::is_same_v<T, family::SinghMaddala>) {
          os << "{family:\"singh_maddala\", a:" << d.a << ", b:" << d.b << ", c:" << d.c << "}";
        } else if constexpr (std::is_same_v<T, family::Pareto>) {
          os << "{family:\"pareto\", a:" << d.a << "}";
        } else if constexpr (std::is_same_v<T, family::LogNormal>) {
          os << "{family:\"lognormal\", a:" << d.a << ", b:" << d.b << "}";
        } else if constexpr (std::is_same_v<T, family::Normal>) {
          os << "{family:\"normal\", a:" << d.a << ", b:" << d.b << "}";
        } else if constexpr (std::is_same_v<T, family::ChiSquare1>) {
          os << "{family:\"chisq1\"}";
        } else if constexpr (std::is_same_v<T, family::Laplace>) {
          os << "{family:\"laplace\", a:" << d.a << ", b:" << d.b << "}";
        } else {
          os << "{family:\"mixture\", weight:" << d.weight << ", first:" << to_record(*d.first)
             << ", second:" << to_record(*d.second) << "}";
        }
      },
      dist.variant());
  return os.str();
}

}  // namespace sdtest
