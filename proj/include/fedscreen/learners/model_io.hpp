#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fedscreen/fileio.hpp"
#include "fedscreen/learners/local_model.hpp"

namespace fedscreen::io {

using nlohmann::json;

inline constexpr int kModelFileVersion = 1;

// Doubles are written in shortest round-trip form; non-finite values (a
// zero class prior, say) become the strings "inf", "-inf" or "nan".
json encode_double(double v);
double decode_double(const json& j);

json to_json(const learn::TreeHyper& h);
json to_json(const learn::SvmHyper& h);
json to_json(const learn::DecisionTreeModel& m);
json to_json(const learn::NaiveBayesModel& m);
json to_json(const learn::LinearSvmModel& m);

learn::TreeHyper tree_hyper_from_json(const json& j);
learn::SvmHyper svm_hyper_from_json(const json& j);
learn::DecisionTreeModel dt_from_json(const json& j);
learn::NaiveBayesModel nb_from_json(const json& j);
learn::LinearSvmModel svm_from_json(const json& j);

// {"type": "dt"|"nb"|"svm", "version": 1, "meta": {...}, ...parameters}
json to_json(const learn::LocalModel& m);
learn::LocalModel local_model_from_json(const json& j);

std::string dump_model(const learn::LocalModel& m);
learn::LocalModel parse_model(std::string_view text);
void save_model(const std::filesystem::path& path, const learn::LocalModel& m);
learn::LocalModel load_model(const std::filesystem::path& path);

}  // namespace fedscreen::io
