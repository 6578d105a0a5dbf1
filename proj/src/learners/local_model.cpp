#include "fedscreen/learners/local_model.hpp"

#include "fedscreen/error.hpp"

namespace fedscreen::learn {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::dt: return "dt";
        case ModelKind::nb: return "nb";
        case ModelKind::svm: return "svm";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& s) {
    if (s == "dt") return ModelKind::dt;
    if (s == "nb") return ModelKind::nb;
    if (s == "svm") return ModelKind::svm;
    throw Error(ErrorCode::invalid_config, "unknown model kind '" + s + "' (expected dt, nb or svm)");
}

int LocalModel::predict(std::span<const double> x) const { return learn::predict(model, x); }

ModelPayload train_model(ModelKind kind, const Samples& data, const LearnerHyper& hyper) {
    switch (kind) {
        case ModelKind::dt: return train_dt(data, hyper.dt);
        case ModelKind::nb: return train_nb(data, hyper.nb_alpha);
        case ModelKind::svm: return train_svm(data, hyper.svm);
    }
    throw Error(ErrorCode::invalid_config, "unknown model kind");
}

int predict(const ModelPayload& model, std::span<const double> x) {
    return std::visit([x](const auto& m) { return m.predict(x); }, model);
}

double accuracy(const ModelPayload& model, const Samples& data) {
    if (data.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (predict(model, data.row(i)) == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace fedscreen::learn
