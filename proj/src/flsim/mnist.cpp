#include "secagg/flsim/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace secagg::flsim {

namespace {

std::uint32_t read_u32_be(std::ifstream& ifs) {
    unsigned char b[4];
    ifs.read(reinterpret_cast<char*>(b), 4);
    if (!ifs) throw std::runtime_error("truncated IDX file");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs) throw std::runtime_error("cannot open " + images_path);
    if (read_u32_be(imgs) != 0x00000803u) throw std::runtime_error("bad image magic in " + images_path);
    const std::uint32_t count = read_u32_be(imgs);
    const std::uint32_t rows = read_u32_be(imgs);
    const std::uint32_t cols = read_u32_be(imgs);

    std::ifstream labs(labels_path, std::ios::binary);
    if (!labs) throw std::runtime_error("cannot open " + labels_path);
    if (read_u32_be(labs) != 0x00000801u) throw std::runtime_error("bad label magic in " + labels_path);
    if (read_u32_be(labs) != count) throw std::runtime_error("image/label count mismatch");

    Dataset d;
    d.num_classes = 10;
    d.features.resize(count, static_cast<Eigen::Index>(rows * cols));
    d.labels.resize(count);
    std::vector<unsigned char> buf(rows * cols);
    for (std::uint32_t i = 0; i < count; ++i) {
        imgs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!imgs) throw std::runtime_error("truncated image data");
        for (std::uint32_t p = 0; p < rows * cols; ++p)
            d.features(i, p) = static_cast<double>(buf[p]) / 255.0;
        unsigned char l;
        labs.read(reinterpret_cast<char*>(&l), 1);
        if (!labs) throw std::runtime_error("truncated label data");
        if (l > 9) throw std::runtime_error("label out of range");
        d.labels[i] = static_cast<int>(l);
    }
    return d;
}

TrainTest load_idx_dir(const std::string& dir, int train_limit, int test_limit, rng::Stream& rs) {
    namespace fs = std::filesystem;
    auto first_existing = [&](std::initializer_list<const char*> names) -> std::string {
        for (const char* n : names) {
            fs::path p = fs::path(dir) / n;
            if (fs::exists(p)) return p.string();
        }
        throw std::runtime_error("no IDX files found under " + dir);
    };
    Dataset train = load_idx(
        first_existing({"train-images-idx3-ubyte", "train-images.idx3-ubyte"}),
        first_existing({"train-labels-idx1-ubyte", "train-labels.idx1-ubyte"}));
    Dataset test = load_idx(first_existing({"t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte",
                                            "test-images-idx3-ubyte"}),
                            first_existing({"t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte",
                                            "test-labels-idx1-ubyte"}));
    TrainTest out;
    out.train = train_limit > 0 && train_limit < train.size() ? sample_dataset(train, train_limit, rs)
                                                              : std::move(train);
    out.test = test_limit > 0 && test_limit < test.size() ? sample_dataset(test, test_limit, rs)
                                                          : std::move(test);
    return out;
}

} // namespace secagg::flsim
