#include "fedscreen/learners/model_io.hpp"

#include <cmath>
#include <limits>

#include "fedscreen/error.hpp"

namespace fedscreen::io {

namespace {

Error malformed(const std::string& what) { return Error(ErrorCode::malformed_payload, "model: " + what); }

json encode_doubles(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(encode_double(x));
    return a;
}

std::vector<double> decode_doubles(const json& j) {
    if (!j.is_array()) throw malformed("expected an array of numbers");
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& x : j) v.push_back(decode_double(x));
    return v;
}

void require_type(const json& j, std::string_view type) {
    if (!j.is_object()) throw malformed("expected an object");
    if (!j.contains("version") || j.at("version") != kModelFileVersion) {
        throw Error(ErrorCode::version_mismatch, "model file version must be " + std::to_string(kModelFileVersion));
    }
    if (j.at("type") != type) throw malformed("expected type " + std::string(type));
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw malformed(e.what());
    }
}

}  // namespace

json encode_double(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double decode_double(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw malformed("expected a number");
}

json to_json(const learn::TreeHyper& h) {
    return {{"criterion", h.criterion}, {"max_depth", h.max_depth}, {"min_leaf", h.min_leaf}};
}

json to_json(const learn::SvmHyper& h) {
    return {{"kernel", h.kernel},       {"gamma", encode_double(h.gamma)}, {"C", encode_double(h.C)},
            {"epochs", h.epochs},       {"tolerance", encode_double(h.tolerance)},
            {"seed", h.seed},           {"encoding", learn::to_string(h.encoding)}};
}

learn::TreeHyper tree_hyper_from_json(const json& j) {
    return guarded([&] {
        learn::TreeHyper h;
        h.criterion = j.at("criterion").get<std::string>();
        h.max_depth = j.at("max_depth").get<std::size_t>();
        h.min_leaf = j.at("min_leaf").get<std::size_t>();
        return h;
    });
}

learn::SvmHyper svm_hyper_from_json(const json& j) {
    return guarded([&] {
        learn::SvmHyper h;
        h.kernel = j.at("kernel").get<std::string>();
        h.gamma = decode_double(j.at("gamma"));
        h.C = decode_double(j.at("C"));
        h.epochs = j.at("epochs").get<std::size_t>();
        h.tolerance = decode_double(j.at("tolerance"));
        h.seed = j.at("seed").get<std::uint64_t>();
        h.encoding = learn::parse_svm_encoding(j.at("encoding").get<std::string>());
        return h;
    });
}

json to_json(const learn::DecisionTreeModel& m) {
    json nodes = json::array();
    for (const auto& n : m.nodes) {
        json children = json::array();
        for (const auto& [value, index] : n.children) children.push_back({value, index});
        nodes.push_back({{"feature", n.feature},
                         {"class_counts", {n.class_counts[0], n.class_counts[1]}},
                         {"majority", n.majority},
                         {"gain", encode_double(n.gain)},
                         {"children", std::move(children)}});
    }
    return {{"type", "dt"},
            {"version", kModelFileVersion},
            {"dim", m.dim},
            {"hyper", to_json(m.hyper)},
            {"feature_importances", encode_doubles(m.feature_importances)},
            {"nodes", std::move(nodes)}};
}

learn::DecisionTreeModel dt_from_json(const json& j) {
    return guarded([&] {
        require_type(j, "dt");
        learn::DecisionTreeModel m;
        m.dim = j.at("dim").get<std::size_t>();
        m.hyper = tree_hyper_from_json(j.at("hyper"));
        m.feature_importances = decode_doubles(j.at("feature_importances"));
        for (const auto& jn : j.at("nodes")) {
            learn::TreeNode n;
            n.feature = jn.at("feature").get<int>();
            n.class_counts = {jn.at("class_counts").at(0).get<std::size_t>(),
                              jn.at("class_counts").at(1).get<std::size_t>()};
            n.majority = jn.at("majority").get<int>();
            n.gain = decode_double(jn.at("gain"));
            for (const auto& c : jn.at("children")) {
                n.children.emplace_back(c.at(0).get<int>(), c.at(1).get<std::size_t>());
            }
            m.nodes.push_back(std::move(n));
        }
        if (m.nodes.empty()) throw malformed("tree has no nodes");
        for (std::size_t i = 0; i < m.nodes.size(); ++i) {
            const auto& n = m.nodes[i];
            if (n.feature >= static_cast<int>(m.dim)) throw malformed("split feature out of range");
            for (const auto& c : n.children) {
                if (c.second <= i || c.second >= m.nodes.size()) throw malformed("bad child index");
            }
        }
        return m;
    });
}

json to_json(const learn::NaiveBayesModel& m) {
    json cond = json::array();
    for (const auto& per_class : m.cond_log_prob) {
        json jc = json::array();
        for (const auto& per_feature : per_class) jc.push_back(encode_doubles(per_feature));
        cond.push_back(std::move(jc));
    }
    return {{"type", "nb"},
            {"version", kModelFileVersion},
            {"class_log_priors", {encode_double(m.class_log_priors[0]), encode_double(m.class_log_priors[1])}},
            {"cond_log_prob", std::move(cond)},
            {"cardinality", m.cardinality},
            {"laplace_alpha", encode_double(m.laplace_alpha)}};
}

learn::NaiveBayesModel nb_from_json(const json& j) {
    return guarded([&] {
        require_type(j, "nb");
        learn::NaiveBayesModel m;
        m.class_log_priors = {decode_double(j.at("class_log_priors").at(0)),
                              decode_double(j.at("class_log_priors").at(1))};
        m.cardinality = j.at("cardinality").get<std::vector<int>>();
        m.laplace_alpha = decode_double(j.at("laplace_alpha"));
        const auto& cond = j.at("cond_log_prob");
        for (std::size_t y = 0; y < 2; ++y) {
            for (const auto& f : cond.at(y)) m.cond_log_prob[y].push_back(decode_doubles(f));
            if (m.cond_log_prob[y].size() != m.cardinality.size()) throw malformed("cond_log_prob shape");
            for (std::size_t f = 0; f < m.cardinality.size(); ++f) {
                if (m.cond_log_prob[y][f].size() != static_cast<std::size_t>(m.cardinality[f])) {
                    throw malformed("cond_log_prob shape");
                }
            }
        }
        return m;
    });
}

json to_json(const learn::LinearSvmModel& m) {
    json svs = json::array();
    for (const auto& sv : m.support_vectors) svs.push_back(encode_doubles(sv));
    return {{"type", "svm"},
            {"version", kModelFileVersion},
            {"w", encode_doubles(m.w)},
            {"b", encode_double(m.b)},
            {"support_vectors", std::move(svs)},
            {"dual_coefs", encode_doubles(m.dual_coefs)},
            {"support_indices", m.support_indices},
            {"train_size", m.train_size},
            {"cardinality", m.cardinality},
            {"hyper", to_json(m.hyper)}};
}

learn::LinearSvmModel svm_from_json(const json& j) {
    return guarded([&] {
        require_type(j, "svm");
        learn::LinearSvmModel m;
        m.w = decode_doubles(j.at("w"));
        m.b = decode_double(j.at("b"));
        for (const auto& sv : j.at("support_vectors")) m.support_vectors.push_back(decode_doubles(sv));
        m.dual_coefs = decode_doubles(j.at("dual_coefs"));
        m.support_indices = j.at("support_indices").get<std::vector<std::size_t>>();
        m.train_size = j.at("train_size").get<std::size_t>();
        m.cardinality = j.at("cardinality").get<std::vector<int>>();
        m.hyper = svm_hyper_from_json(j.at("hyper"));
        if (m.dual_coefs.size() != m.support_vectors.size()) throw malformed("dual_coefs/support_vectors length");
        for (const auto& sv : m.support_vectors) {
            if (sv.size() != m.w.size()) throw malformed("support vector dimension");
        }
        if (m.hyper.encoding == learn::SvmEncoding::one_hot &&
            learn::encoded_dim(m.cardinality, m.cardinality.size(), m.hyper.encoding) != m.w.size()) {
            throw malformed("one-hot dimension does not match cardinality");
        }
        return m;
    });
}

json to_json(const learn::LocalModel& m) {
    json j = std::visit([](const auto& model) { return to_json(model); }, m.model);
    j["meta"] = {{"client_id", m.meta.client_id},
                 {"train_size", m.meta.train_size},
                 {"train_accuracy", encode_double(m.meta.train_accuracy)}};
    return j;
}

learn::LocalModel local_model_from_json(const json& j) {
    return guarded([&] {
        learn::LocalModel m;
        const std::string type = j.at("type").get<std::string>();
        if (type == "dt") {
            m.model = dt_from_json(j);
        } else if (type == "nb") {
            m.model = nb_from_json(j);
        } else if (type == "svm") {
            m.model = svm_from_json(j);
        } else {
            throw Error(ErrorCode::unknown_type, "unknown model type '" + type + "'");
        }
        const auto& meta = j.at("meta");
        m.meta.client_id = meta.at("client_id").get<std::uint32_t>();
        m.meta.train_size = meta.at("train_size").get<std::size_t>();
        m.meta.train_accuracy = decode_double(meta.at("train_accuracy"));
        return m;
    });
}

std::string dump_model(const learn::LocalModel& m) { return to_json(m).dump(1) + "\n"; }

learn::LocalModel parse_model(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw malformed(e.what());
    }
    return local_model_from_json(j);
}

void save_model(const std::filesystem::path& path, const learn::LocalModel& m) { write_file(path, dump_model(m)); }

learn::LocalModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

}  // namespace fedscreen::io
