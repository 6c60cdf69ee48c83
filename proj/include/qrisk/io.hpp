#pragma once

#include "qrisk/distortion.hpp"
#include "qrisk/distribution.hpp"

#include <istream>
#include <string>

namespace qrisk {

/// Distribution from a JSON document such as
/// {"kind": "pareto_negative", "beta": 1, "tail_index": 2}. Throws ParseError.
Distribution parse_distribution_json(const std::string& text);

/// CSV with one value per line, or `value,weight` per line. Blank lines and
/// lines starting with '#' are skipped; an optional header `value` or
/// `value,weight` may open the file. Repeated values are merged into one atom.
Distribution parse_distribution_csv(std::istream& in);
Distribution read_distribution_csv(const std::string& path);

/// Inline JSON (text starting with '{'), a .json file, or a CSV file.
Distribution load_distribution(const std::string& spec);

/// Distortion from JSON such as {"kind": "es", "alpha": 0.5}.
Distortion parse_distortion_json(const std::string& text);
/// Inline JSON or a path to a JSON file.
Distortion load_distortion(const std::string& spec);

/// Inverse of parse_distortion_json for representable distortions.
std::string distortion_to_json(const Distortion& d);

} // namespace qrisk
