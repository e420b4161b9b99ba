#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "secretsieve/ir.hpp"

namespace secretsieve {

enum class StringOrigin { kMethodBody, kStaticField };

struct StringOccurrence {
  std::string value;
  std::string app_id;
  std::string class_name;
  std::optional<std::string> method_name;
  std::optional<std::size_t> statement_index;
  StringOrigin origin = StringOrigin::kMethodBody;
  /// Set for method-body occurrences; lets detectors get back to the IR.
  std::optional<MethodRef> method;

  bool operator==(const StringOccurrence&) const = default;
};

/// All the string literals of one method, in statement order.
struct StringGroup {
  std::string app_id;
  std::string class_name;
  std::string method_name;
  MethodRef method;
  std::vector<std::string> strings;

  bool operator==(const StringGroup&) const = default;
};

/// One occurrence per string constant in method bodies and per static-field
/// initializer. Per class: fields first, then methods in order.
std::vector<StringOccurrence> extract_occurrences(const IrApp& app);

/// String constants of a single statement, left to right.
std::vector<std::string> statement_strings(const IrStatement& stmt);

/// One group per method with at least `min_size` string constants.
std::vector<StringGroup> build_string_groups(const IrApp& app, std::size_t min_size);

/// `app_id,class,method,index,value` with RFC-4180 quoting.
std::string occurrences_to_csv(const std::vector<StringOccurrence>& occurrences);

std::string csv_escape(const std::string& field);

}  // namespace secretsieve
