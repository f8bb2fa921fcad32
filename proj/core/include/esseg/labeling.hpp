#ifndef ESSEG_LABELING_HPP
#define ESSEG_LABELING_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace esseg {

// A total pixel partition: one label per pixel, row-major. Producers keep
// labels dense in [0, num_labels); files loaded from disk only guarantee
// labels < num_labels.
struct Labeling {
    int width = 0;
    int height = 0;
    std::vector<int> labels;
    int num_labels = 0;

    Labeling() = default;
    Labeling(int w, int h, int n_labels = 1)
        : width(w), height(h), labels(std::size_t(w) * std::size_t(h), 0),
          num_labels(n_labels) {}

    int at(int x, int y) const { return labels[std::size_t(y) * width + x]; }
    int& at(int x, int y) { return labels[std::size_t(y) * width + x]; }
    std::size_t pixels() const { return std::size_t(width) * std::size_t(height); }
};

// Throws shape_error on inconsistent dimensions or out-of-range labels.
void check_labeling(const Labeling& l, const std::string& who);

// Label maps persist as 16-bit PGM; the sample value is the label id.
// Saving more than 65536 labels is refused. Loading sets num_labels to
// max(sample)+1 and accepts 8-bit PGM too.
void save_labeling(const Labeling& l, const std::string& path);
Labeling load_labeling(const std::string& path);

// CSV with header "x,y,label" and one row per pixel in row-major order.
void save_labeling_csv(const Labeling& l, const std::string& path);

} // namespace esseg

#endif
