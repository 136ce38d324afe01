// devroll - artifact output
//
// Every number is written with 17 significant digits so artifacts round-trip
// exactly, and every file is written to a temporary sibling and renamed into place.

#ifndef DEVROLL_IO_HPP
#define DEVROLL_IO_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

#include "devroll/transport.hpp"
#include "devroll/variation.hpp"

namespace devroll::io {

// %.17g; non-finite values as nan / inf / -inf.
std::string format_double(double v);

// Writes content to path via a temporary file in the same directory and rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Header t,x0..x{n-1}[,f00..f{n-1}{n-1}]; frame entries row major.
std::string trajectory_csv(const DevelopmentResult& r, bool frames);

// Header t,U0..U{n-1}[,X00..X{n-1}{n-1}].
std::string variation_csv(const VariationField& v, bool x_columns);

// Pretty JSON with sorted keys, doubles as %.17g and non-finite doubles as null.
std::string to_json_text(const nlohmann::json& j);

nlohmann::json to_json(const Vec& v);
nlohmann::json to_json(const Mat& m);

}  // namespace devroll::io

#endif  // DEVROLL_IO_HPP
