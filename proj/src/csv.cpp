#include "beamobs/csv.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <boost/algorithm/string.hpp>

#include <charconv>
#include <fstream>

#include "beamobs/error.hpp"

namespace beamobs::csv {

void write(const std::filesystem::path& path, const Table& t) {
    if (!t.header.empty() && static_cast<Eigen::Index>(t.header.size()) != t.data.cols())
        throw Error(ErrorKind::Io, fmt::format("{}: {} header fields for {} columns", path.string(),
                                               t.header.size(), t.data.cols()));
    std::string buf = fmt::format("# format={}\n{}\n", kFormatVersion, fmt::join(t.header, ","));
    for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
        for (Eigen::Index j = 0; j < t.data.cols(); ++j) {
            if (j) buf += ',';
            fmt::format_to(std::back_inserter(buf), "{}", t.data(i, j));
        }
        buf += '\n';
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << buf;
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::string line;
    const std::string expected = fmt::format("# format={}", kFormatVersion);
    if (!std::getline(in, line) || boost::algorithm::trim_copy(line) != expected)
        throw Error(ErrorKind::Io, fmt::format("{}: first line must be '{}'", path.string(), expected));
    Table t;
    if (!std::getline(in, line)) throw Error(ErrorKind::Io, path.string() + ": missing header");
    boost::algorithm::trim(line);
    if (!line.empty()) boost::algorithm::split(t.header, line, boost::algorithm::is_any_of(","));

    std::vector<std::vector<double>> rows;
    int lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        boost::algorithm::trim(line);
        if (line.empty()) continue;
        std::vector<std::string> cells;
        boost::algorithm::split(cells, line, boost::algorithm::is_any_of(","));
        if (cells.size() != t.header.size())
            throw Error(ErrorKind::Io, fmt::format("{}:{}: {} fields, header has {}", path.string(),
                                                   lineno, cells.size(), t.header.size()));
        std::vector<double> row;
        for (const auto& c : cells) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc{} || ptr != c.data() + c.size())
                throw Error(ErrorKind::Io, fmt::format("{}:{}: bad number '{}'", path.string(), lineno, c));
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    t.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            t.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return t;
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
    std::vector<std::string> out;
    for (Eigen::Index i = 1; i <= n; ++i) out.push_back(fmt::format("{}_{}", prefix, i));
    return out;
}

} // namespace beamobs::csv
