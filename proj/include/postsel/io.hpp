#pragma once

// JSON and CSV serialization. Operators are stored as
//   {"rows": r, "cols": c, "dims": [...], "re": [[...], ...], "im": [[...], ...]}
// with re/im as row-major nested arrays.

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "postsel/diamond.hpp"
#include "postsel/postselect.hpp"
#include "postsel/qkd.hpp"
#include "postsel/symmetric.hpp"

namespace postsel::io {

using json = nlohmann::ordered_json;

/// Malformed input; path is a JSON pointer to the offending value.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Finite doubles as numbers, non-finite values as null.
json number(double x);

json to_json(const Operator& op);
Operator operator_from_json(const json& j, const std::string& path = "");

json to_json(const Channel& c);
json to_json(const HPMap& m);
/// Accepts "kind": "channel" or "hp" (default "hp").
HPMap map_from_json(const json& j, const std::string& path = "");

json to_json(const DiamondResult& r, bool with_witness = false);
json to_json(const PostSelectionReport& r);
/// tau_full and the purification ket only when full is set.
json tau_to_json(const TauFamily& tau, bool full);
json to_json(const SecurityParams& p);
json to_json(const ToyReport& r);

json parse(const std::string& text);
std::string read_file(const std::string& path);
/// Writes via a temporary file in the same directory and renames it.
void write_file_atomic(const std::string& path, const std::string& content);

/// 17 significant digits, '.' decimal separator, no locale.
std::string format_double(double x);
std::string csv_line(const std::vector<std::string>& fields);

std::string dump(const json& j);

}  // namespace postsel::io
