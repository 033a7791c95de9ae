#include <felp/descriptor.hpp>
#include <felp/error.hpp>

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace felp {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line_no) {
    T value{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw Error(ErrorKind::InvalidInput,
                    "descriptor csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return value;
}

} // namespace

void write_descriptor_csv(std::ostream& out, std::span<const DescriptorRecord> records,
                          std::span<const std::string> provenance) {
    for (const auto& line : provenance)
        out << "# " << line << '\n';
    const std::size_t len = records.empty() ? 0 : records.front().descriptor.bins.size();
    out << "patch_id,label,method,n,stain_mode,bin_count";
    for (std::size_t i = 0; i < len; ++i)
        out << ",b" << i;
    out << '\n';
    for (const auto& r : records) {
        const auto& d = r.descriptor;
        out << r.patch_id << ',' << r.label << ',' << to_string(d.method) << ',' << d.n << ','
            << to_string(d.stain_mode) << ',' << d.bins.size();
        for (double b : d.bins)
            out << ',' << format_double(b);
        out << '\n';
    }
}

std::vector<DescriptorRecord> read_descriptor_csv(std::istream& in) {
    std::vector<DescriptorRecord> records;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        if (!header_seen) {
            if (line.rfind("patch_id,", 0) != 0)
                throw Error(ErrorKind::InvalidInput, "descriptor csv: missing header line");
            header_seen = true;
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() < 6)
            throw Error(ErrorKind::InvalidInput, "descriptor csv line " + std::to_string(line_no) + ": too few fields");
        DescriptorRecord r;
        r.patch_id = f[0];
        r.label = parse_number<int>(f[1], line_no);
        if (r.label != 0 && r.label != 1)
            throw Error(ErrorKind::InvalidInput, "descriptor csv line " + std::to_string(line_no) + ": label must be 0 or 1");
        r.descriptor.method = parse_method(f[2]);
        r.descriptor.n = parse_number<int>(f[3], line_no);
        r.descriptor.stain_mode = parse_stain_mode(f[4]);
        const auto count = parse_number<std::size_t>(f[5], line_no);
        if (f.size() != 6 + count)
            throw Error(ErrorKind::InvalidInput,
                        "descriptor csv line " + std::to_string(line_no) + ": bin_count does not match fields");
        r.descriptor.bins.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
            r.descriptor.bins.push_back(parse_number<double>(f[6 + i], line_no));
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace felp
