#include "esseg/labeling.hpp"

#include <algorithm>
#include <sstream>

#include "esseg/errors.hpp"
#include "esseg/image_io.hpp"

namespace esseg {

void check_labeling(const Labeling& l, const std::string& who) {
    if (l.width < 1 || l.height < 1)
        throw shape_error(who + ": dimensions must be positive");
    if (l.labels.size() != l.pixels())
        throw shape_error(who + ": label count does not match dimensions");
    if (l.num_labels < 1) throw shape_error(who + ": num_labels must be >= 1");
    for (const int v : l.labels)
        if (v < 0 || v >= l.num_labels)
            throw shape_error(who + ": label " + std::to_string(v) +
                              " outside [0, " + std::to_string(l.num_labels) + ")");
}

void save_labeling(const Labeling& l, const std::string& path) {
    check_labeling(l, "save_labeling");
    if (l.num_labels > 65536)
        throw io_error("save_labeling: " + std::to_string(l.num_labels) +
                       " labels do not fit 16-bit samples");
    Pgm16 img;
    img.width = l.width;
    img.height = l.height;
    img.samples.resize(l.labels.size());
    std::transform(l.labels.begin(), l.labels.end(), img.samples.begin(),
                   [](int v) { return static_cast<std::uint16_t>(v); });
    save_pgm16(img, path);
}

Labeling load_labeling(const std::string& path) {
    const Pgm16 img = load_pgm16(path);
    Labeling l;
    l.width = img.width;
    l.height = img.height;
    l.labels.assign(img.samples.begin(), img.samples.end());
    const int max_label =
        l.labels.empty() ? 0 : *std::max_element(l.labels.begin(), l.labels.end());
    l.num_labels = max_label + 1;
    return l;
}

void save_labeling_csv(const Labeling& l, const std::string& path) {
    check_labeling(l, "save_labeling_csv");
    std::ostringstream out;
    out << "x,y,label\n";
    for (int y = 0; y < l.height; ++y)
        for (int x = 0; x < l.width; ++x) out << x << ',' << y << ',' << l.at(x, y) << '\n';
    write_file_atomic(path, out.str());
}

} // namespace esseg
