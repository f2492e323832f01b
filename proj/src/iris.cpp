#include "sbneuro/iris.hpp"

#include "sbneuro/errors.hpp"
#include "sbneuro/io.hpp"

#include <array>
#include <cstdlib>

#ifndef SBNEURO_BUNDLED_DATA_DIR
#define SBNEURO_BUNDLED_DATA_DIR ""
#endif

namespace sbneuro {

const std::array<std::string, 3>& iris_class_names()
{
    static const std::array<std::string, 3> names = {"setosa", "versicolor", "virginica"};
    return names;
}

void IrisDataset::validate() const
{
    if (samples.size() != 150) {
        throw InputError("iris dataset: expected 150 rows, got " +
                         std::to_string(samples.size()));
    }
    std::array<int, 3> per_class = {0, 0, 0};
    for (const auto& s : samples) {
        if (s.label < 0 || s.label > 2) {
            throw InputError("iris dataset: label out of range");
        }
        ++per_class[static_cast<size_t>(s.label)];
        for (double f : s.features) {
            if (!(f > 0.0)) {
                throw InputError("iris dataset: features must be positive");
            }
        }
    }
    for (int c : per_class) {
        if (c != 50) {
            throw InputError("iris dataset: expected 50 rows per class");
        }
    }
}

IrisDataset load_iris(const std::filesystem::path& path)
{
    std::vector<std::string> labels;
    CsvTable table = read_csv_numeric_columns(path, &labels);
    const std::array<std::string, 4> expected = {"sepal_length", "sepal_width",
                                                 "petal_length", "petal_width"};
    if (table.columns.size() != 5 || table.columns[4] != "label") {
        throw InputError(path.string() + ": expected header "
                         "'sepal_length,sepal_width,petal_length,petal_width,label'");
    }
    for (size_t i = 0; i < 4; ++i) {
        if (table.columns[i] != expected[i]) {
            throw InputError(path.string() + ": unexpected column '" + table.columns[i] + "'");
        }
    }
    IrisDataset dataset;
    dataset.samples.reserve(table.rows.size());
    for (size_t i = 0; i < table.rows.size(); ++i) {
        IrisSample s;
        for (size_t f = 0; f < 4; ++f) {
            s.features[f] = table.rows[i][f];
        }
        const auto& names = iris_class_names();
        int label = -1;
        for (size_t c = 0; c < names.size(); ++c) {
            if (labels[i] == names[c]) {
                label = static_cast<int>(c);
            }
        }
        if (label < 0) {
            throw InputError(path.string() + ": unknown class label '" + labels[i] + "'");
        }
        s.label = label;
        dataset.samples.push_back(s);
    }
    dataset.validate();
    return dataset;
}

std::filesystem::path resolve_iris_path(const std::optional<std::filesystem::path>& explicit_path)
{
    if (explicit_path) {
        return *explicit_path;
    }
    if (const char* dir = std::getenv("SBNEURO_DATA_DIR")) {
        return std::filesystem::path(dir) / "iris.csv";
    }
    return std::filesystem::path(SBNEURO_BUNDLED_DATA_DIR) / "iris.csv";
}

} // namespace sbneuro
