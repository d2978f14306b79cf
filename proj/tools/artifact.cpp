#include "kmaha/cli.hpp"

#include "json.hpp"

namespace kmaha::cli {

namespace {

using nlohmann::json;

constexpr int artifact_version = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows) throw InvalidArgument("artifact: matrix row count mismatch");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = data.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw InvalidArgument("artifact: matrix column count mismatch");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json method_to_json(const eval::MethodConfig& m) {
    json candidates = json::array();
    for (const auto& c : m.candidates) candidates.push_back(c.to_string());
    json j{{"name", m.label()},
           {"learner", eval::to_string(m.learner)},
           {"kernelization", eval::to_string(m.kernelization)},
           {"candidates", std::move(candidates)},
           {"folds", m.folds},
           {"k", m.k},
           {"k_nn", m.k_nn},
           {"c", m.lmnn.c},
           {"nca_max_iterations", m.nca.max_iterations},
           {"lmnn_max_iterations", m.lmnn.max_iterations}};
    j["max_dim"] = m.max_dim ? json(*m.max_dim) : json(nullptr);
    j["dim"] = m.dim ? json(*m.dim) : json(nullptr);
    return j;
}

eval::MethodConfig method_from_json(const json& j) {
    eval::MethodConfig m;
    m.name = j.at("name").get<std::string>();
    m.learner = eval::parse_learner(j.at("learner").get<std::string>());
    m.kernelization = eval::parse_kernelization(j.at("kernelization").get<std::string>());
    for (const auto& c : j.at("candidates")) m.candidates.push_back(kernel::KernelSpec::parse(c.get<std::string>()));
    m.folds = j.at("folds").get<int>();
    m.k = j.at("k").get<int>();
    m.k_nn = j.at("k_nn").get<int>();
    m.lmnn.c = j.at("c").get<double>();
    m.nca.max_iterations = j.at("nca_max_iterations").get<int>();
    m.lmnn.max_iterations = j.at("lmnn_max_iterations").get<int>();
    if (!j.at("max_dim").is_null()) m.max_dim = j.at("max_dim").get<Eigen::Index>();
    if (!j.at("dim").is_null()) m.dim = j.at("dim").get<Eigen::Index>();
    return m;
}

}  // namespace

std::string serialize_pipeline(const eval::FittedPipeline& p, const data::LabelColumn& label_column) {
    json j;
    j["version"] = artifact_version;
    j["method"] = method_to_json(p.config);
    j["label_column"] = std::holds_alternative<int>(label_column) ? json(std::get<int>(label_column))
                                                                  : json(std::get<std::string>(label_column));
    j["input_dim"] = p.input_dim;
    j["class_count"] = p.class_count;
    j["class_names"] = p.class_names;
    j["neighbor_rule"] = eval::to_string(p.neighbor_rule);
    if (p.standardizer)
        j["standardizer"] = {{"mean", vector_to_json(p.standardizer->mean)},
                             {"scale", vector_to_json(p.standardizer->scale)}};
    else
        j["standardizer"] = nullptr;
    if (p.kpca)
        j["kpca"] = {{"kernel", p.kpca->kernel.to_string()},
                     {"train_points", matrix_to_json(p.kpca->train_points)},
                     {"eigenvalues", vector_to_json(p.kpca->eigenvalues)},
                     {"projection", matrix_to_json(p.kpca->projection)},
                     {"gram_column_means", vector_to_json(p.kpca->gram_column_means)},
                     {"gram_mean", p.kpca->gram_mean}};
    else
        j["kpca"] = nullptr;
    if (p.alignment) {
        j["alignment"] = {{"method", alignment::to_string(p.alignment->method)},
                          {"weights", vector_to_json(p.alignment->weights)},
                          {"achieved_alignment", p.alignment->achieved_alignment}};
    }
    j["transform"] = {{"provenance", p.transform.provenance}, {"A", matrix_to_json(p.transform.A)}};
    j["train_embedding"] = matrix_to_json(p.train_embedding);
    j["train_labels"] = p.train_labels;
    j["objective_trace"] = p.objective_trace;
    return j.dump(1) + "\n";
}

LoadedModel deserialize_pipeline(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("artifact: not valid JSON: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != artifact_version) throw InvalidArgument("artifact: unsupported version");
        LoadedModel out;
        auto& p = out.pipeline;
        p.config = method_from_json(j.at("method"));
        const auto& lc = j.at("label_column");
        if (lc.is_number_integer()) out.label_column = lc.get<int>();
        else out.label_column = lc.get<std::string>();
        p.input_dim = j.at("input_dim").get<Eigen::Index>();
        p.class_count = j.at("class_count").get<int>();
        p.class_names = j.at("class_names").get<std::vector<std::string>>();
        p.neighbor_rule = eval::parse_neighbor_rule(j.at("neighbor_rule").get<std::string>());
        if (!j.at("standardizer").is_null()) {
            data::Standardizer s;
            s.mean = vector_from_json(j["standardizer"].at("mean"));
            s.scale = vector_from_json(j["standardizer"].at("scale"));
            p.standardizer = std::move(s);
        }
        if (!j.at("kpca").is_null()) {
            const auto& k = j["kpca"];
            kpca::KpcaModel m;
            m.kernel = kernel::KernelSpec::parse(k.at("kernel").get<std::string>());
            m.train_points = matrix_from_json(k.at("train_points"));
            m.eigenvalues = vector_from_json(k.at("eigenvalues"));
            m.projection = matrix_from_json(k.at("projection"));
            m.gram_column_means = vector_from_json(k.at("gram_column_means"));
            m.gram_mean = k.at("gram_mean").get<double>();
            p.kpca = std::move(m);
        }
        p.transform.provenance = j.at("transform").at("provenance").get<std::string>();
        p.transform.A = matrix_from_json(j.at("transform").at("A"));
        p.train_embedding = matrix_from_json(j.at("train_embedding"));
        p.train_labels = j.at("train_labels").get<std::vector<int>>();
        p.objective_trace = j.at("objective_trace").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(p.train_labels.size()) != p.train_embedding.rows())
            throw InvalidArgument("artifact: label count does not match the training embedding");
        return out;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("artifact: malformed model: ") + e.what());
    }
}

}  // namespace kmaha::cli
