#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sbneuro {

struct IrisSample {
    std::array<double, 4> features{}; // cm
    int label = 0;                    // index into iris_class_names()
};

const std::array<std::string, 3>& iris_class_names(); // setosa, versicolor, virginica

/// The 150-sample Fisher Iris table.
struct IrisDataset {
    std::vector<IrisSample> samples;

    /// Throws InputError unless there are exactly 150 rows, 50 per class,
    /// all features positive.
    void validate() const;
};

/// Reads CSV with header
/// `sepal_length,sepal_width,petal_length,petal_width,label`.
IrisDataset load_iris(const std::filesystem::path& path);

/// Resolution order: explicit path, $SBNEURO_DATA_DIR/iris.csv, the copy
/// shipped in the repository's data/ directory.
std::filesystem::path resolve_iris_path(const std::optional<std::filesystem::path>& explicit_path);

} // namespace sbneuro
