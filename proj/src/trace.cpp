#include "lossid/sim/trace.hpp"

#include <zlib.h>

#include <fstream>
#include <sstream>

#include "lossid/util.hpp"

namespace lossid::sim {

LossLabel label_from_name(const std::string& s) {
    if (s == "qDrop") return LossLabel::QDrop;
    if (s == "wDrop") return LossLabel::WDrop;
    if (s == "unDrop") return LossLabel::UnDrop;
    throw ParseError("unknown loss label: '" + s + "'");
}

TraceSummary PacketTrace::summarize(const std::vector<PacketEvent>& events) {
    TraceSummary s;
    for (const auto& ev : events) {
        if (ev.is_retransmission) continue;
        ++s.total_packets;
        if (ev.fate == LossLabel::QDrop) ++s.qdrop_count;
        else if (ev.fate == LossLabel::WDrop) ++s.wdrop_count;
    }
    return s;
}

namespace {

constexpr const char* kTraceHeader =
    "seq,send_time_s,size_bytes,cwnd_segments,ssthresh_segments,fate,is_retx,ack_time_s,rtt_ms";

bool is_gz(const std::string& path) {
    return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

// Line sink over either a plain ofstream or a gzFile.
class LineWriter {
public:
    explicit LineWriter(const std::string& path) : gz_(is_gz(path)) {
        if (gz_) {
            gzf_ = gzopen(path.c_str(), "wb");
            if (!gzf_) throw ParseError("cannot open for writing: " + path);
        } else {
            out_.open(path, std::ios::binary);
            if (!out_) throw ParseError("cannot open for writing: " + path);
        }
    }
    ~LineWriter() {
        if (gzf_) gzclose(gzf_);
    }
    void line(const std::string& s) {
        if (gz_) {
            if (gzwrite(gzf_, s.data(), static_cast<unsigned>(s.size())) !=
                    static_cast<int>(s.size()) ||
                gzwrite(gzf_, "\n", 1) != 1)
                throw ParseError("gzip write failed");
        } else {
            out_ << s << '\n';
        }
    }
    void close() {
        if (gz_) {
            gzclose(gzf_);
            gzf_ = nullptr;
        } else {
            out_.close();
        }
    }

private:
    bool gz_;
    std::ofstream out_;
    gzFile gzf_ = nullptr;
};

class LineReader {
public:
    explicit LineReader(const std::string& path) : gz_(is_gz(path)) {
        if (gz_) {
            gzf_ = gzopen(path.c_str(), "rb");
            if (!gzf_) throw ParseError("cannot open: " + path);
        } else {
            in_.open(path, std::ios::binary);
            if (!in_) throw ParseError("cannot open: " + path);
        }
    }
    ~LineReader() {
        if (gzf_) gzclose(gzf_);
    }

    // Returns false at EOF. byte_offset() reports the offset of the start of
    // the line just returned (uncompressed bytes for .gz).
    bool next(std::string& line) {
        line_start_ = consumed_;
        line.clear();
        if (gz_) {
            char buf[4096];
            bool got = false;
            for (;;) {
                if (gzgets(gzf_, buf, sizeof(buf)) == nullptr) return got;
                got = true;
                line += buf;
                consumed_ += std::string_view(buf).size();
                if (!line.empty() && line.back() == '\n') {
                    line.pop_back();
                    return true;
                }
            }
        }
        if (!std::getline(in_, line)) return false;
        consumed_ += line.size() + 1;
        return true;
    }

    std::size_t byte_offset() const { return line_start_; }

private:
    bool gz_;
    std::ifstream in_;
    gzFile gzf_ = nullptr;
    std::size_t consumed_ = 0;
    std::size_t line_start_ = 0;
};

std::string opt_field(double v) { return std::isnan(v) ? std::string() : fmt_double(v); }

}  // namespace

void save_trace(const PacketTrace& trace, const std::string& path) {
    LineWriter w(path);
    w.line(kTraceHeader);
    std::string buf;
    for (const auto& ev : trace.events) {
        buf.clear();
        buf += std::to_string(ev.seq);
        buf += ',';
        buf += fmt_double(ev.send_time_s);
        buf += ',';
        buf += std::to_string(ev.size_bytes);
        buf += ',';
        buf += fmt_double(ev.cwnd_at_send_segments);
        buf += ',';
        buf += fmt_double(ev.ssthresh_at_send_segments);
        buf += ',';
        buf += label_name(ev.fate);
        buf += ',';
        buf += ev.is_retransmission ? '1' : '0';
        buf += ',';
        buf += opt_field(ev.ack_time_s);
        buf += ',';
        buf += opt_field(ev.measured_rtt_ms);
        w.line(buf);
    }
    w.close();
}

PacketTrace load_trace(const std::string& path) {
    LineReader r(path);
    std::string line;
    if (!r.next(line)) throw ParseError("empty trace file: " + path);
    if (line != kTraceHeader)
        throw ParseError("trace parse error at byte 0: bad header in " + path);
    PacketTrace trace;
    auto fail = [&](const std::string& why) -> ParseError {
        return ParseError("trace parse error at byte " + std::to_string(r.byte_offset()) + ": " +
                          why + " in " + path);
    };
    while (r.next(line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 9) throw fail("expected 9 fields, got " + std::to_string(f.size()));
        PacketEvent ev;
        try {
            ev.seq = parse_int(f[0], "seq");
            ev.send_time_s = parse_double(f[1], "send_time_s");
            ev.size_bytes = static_cast<std::int32_t>(parse_int(f[2], "size_bytes"));
            ev.cwnd_at_send_segments = parse_double(f[3], "cwnd_segments");
            ev.ssthresh_at_send_segments = parse_double(f[4], "ssthresh_segments");
            ev.fate = label_from_name(std::string(f[5]));
            if (f[6] != "0" && f[6] != "1") throw ParseError("bad is_retx flag");
            ev.is_retransmission = f[6] == "1";
            if (!f[7].empty()) ev.ack_time_s = parse_double(f[7], "ack_time_s");
            if (!f[8].empty()) ev.measured_rtt_ms = parse_double(f[8], "rtt_ms");
        } catch (const ParseError& e) {
            throw fail(e.what());
        }
        trace.events.push_back(ev);
    }
    trace.recompute_summary();
    return trace;
}

void save_series_csv(const std::vector<SeriesSample>& series, const std::string& value_name,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "time_s," << value_name << '\n';
    for (const auto& s : series) out << fmt_double(s.time_s) << ',' << fmt_double(s.value) << '\n';
}

}  // namespace lossid::sim
