#include "wdrc/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace wdrc::data {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, const std::string& context) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw DataError("malformed number '" + s + "' in " + context);
    return value;
}

bool iso_date_ok(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

}  // namespace

MatrixXd PricePanel::daily_returns() const {
    if (days() < 2) throw DataError("daily_returns: need at least two days of prices");
    MatrixXd r(days() - 1, assets());
    for (int t = 0; t + 1 < days(); ++t)
        for (int i = 0; i < assets(); ++i) r(t, i) = prices(t + 1, i) / prices(t, i) - 1.0;
    return r;
}

PricePanel load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file: " + path);

    std::string header;
    if (!std::getline(in, header)) throw DataError("empty data file: " + path);
    auto cols = split_csv_line(header);
    if (cols.size() < 3 || cols.front() != "date")
        throw DataError("missing column: header must be date,<TICKER>...,RF_ANNUAL");
    if (cols.back() != "RF_ANNUAL") throw DataError("missing column: RF_ANNUAL");

    PricePanel panel;
    panel.tickers.assign(cols.begin() + 1, cols.end() - 1);
    const size_t ncols = cols.size();

    struct Row {
        std::string date;
        std::vector<double> values;  // tickers then rf
    };
    std::vector<Row> rows;
    std::string line;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != ncols)
            throw DataError("malformed number of fields at line " + std::to_string(lineno));
        bool gap = false;
        for (size_t k = 1; k < fields.size(); ++k)
            if (fields[k].empty()) gap = true;
        if (gap) continue;  // rows with gaps are rejected
        Row row;
        row.date = fields[0];
        if (!iso_date_ok(row.date))
            throw DataError("malformed date '" + row.date + "' at line " + std::to_string(lineno));
        for (size_t k = 1; k < fields.size(); ++k)
            row.values.push_back(parse_number(fields[k], "line " + std::to_string(lineno)));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("no data rows in " + path);

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    for (size_t t = 1; t < rows.size(); ++t)
        if (rows[t].date == rows[t - 1].date) throw DataError("duplicate date " + rows[t].date);

    const int T = static_cast<int>(rows.size());
    const int d = static_cast<int>(panel.tickers.size());
    panel.prices.resize(T, d);
    panel.riskfree_annual.resize(T);
    panel.dates.reserve(T);
    for (int t = 0; t < T; ++t) {
        panel.dates.push_back(rows[t].date);
        for (int i = 0; i < d; ++i) {
            double px = rows[t].values[i];
            if (!(px > 0.0))
                throw DataError("nonpositive price for " + panel.tickers[i] + " on " + rows[t].date);
            panel.prices(t, i) = px;
        }
        panel.riskfree_annual[t] = rows[t].values[d];
    }
    return panel;
}

double riskfree_n(double r_annual, int n) {
    if (n < 1) throw DataError("riskfree_n: horizon must be >= 1");
    return std::pow(1.0 + r_annual / 252.0, n) - 1.0;
}

MatrixXd compound_returns(const MatrixXd& daily, int n) {
    const int T = static_cast<int>(daily.rows());
    if (n < 1) throw DataError("compound_returns: horizon must be >= 1");
    if (T < n) throw DataError("compound_returns: insufficient history");
    MatrixXd out(T - n + 1, daily.cols());
    for (int s = 0; s + n <= T; ++s)
        for (int i = 0; i < daily.cols(); ++i) {
            double gross = 1.0;
            for (int k = 0; k < n; ++k) gross *= 1.0 + daily(s + k, i);
            out(s, i) = gross - 1.0;
        }
    return out;
}

WindowSamples compound_windows(const PricePanel& panel, int end_index, int lookback, int n,
                               double rho) {
    if (n < 1 || lookback < n) throw DataError("compound_windows: need lookback >= n >= 1");
    if (end_index < lookback || end_index >= panel.days())
        throw DataError("compound_windows: insufficient history before end_index");

    // Daily returns covering [end_index - lookback + 1, end_index].
    const int d = panel.assets();
    MatrixXd daily(lookback, d);
    for (int t = 0; t < lookback; ++t) {
        int day = end_index - lookback + 1 + t;
        for (int i = 0; i < d; ++i)
            daily(t, i) = panel.prices(day, i) / panel.prices(day - 1, i) - 1.0;
    }

    WindowSamples ws;
    ws.horizon = n;
    ws.r_fn = riskfree_n(panel.riskfree_annual[end_index], n);
    ws.samples = compound_returns(daily, n);
    ws.samples.array() -= ws.r_fn;

    VectorXd lo = ws.samples.colwise().minCoeff();
    VectorXd hi = ws.samples.colwise().maxCoeff();
    if (rho != 0.0) {
        VectorXd mid = 0.5 * (lo + hi);
        VectorXd half = 0.5 * (hi - lo) * (1.0 + rho);
        lo = mid - half;
        hi = mid + half;
    }
    ws.support = model::BoxSupport(lo, hi);
    return ws;
}

void write_samples_csv(const WindowSamples& ws, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw DataError("cannot write " + path);
    std::fprintf(f, "# horizon,%d\n# r_fn,%.17g\n", ws.horizon, ws.r_fn);
    for (int r = 0; r < ws.samples.rows(); ++r) {
        for (int c = 0; c < ws.samples.cols(); ++c)
            std::fprintf(f, c ? ",%.17g" : "%.17g", ws.samples(r, c));
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

WindowSamples read_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    WindowSamples ws;
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto fields = split_csv_line(line);
            if (fields.size() == 2 && fields[0] == "# horizon")
                ws.horizon = static_cast<int>(parse_number(fields[1], "horizon header"));
            if (fields.size() == 2 && fields[0] == "# r_fn")
                ws.r_fn = parse_number(fields[1], "r_fn header");
            continue;
        }
        auto fields = split_csv_line(line);
        std::vector<double> row;
        for (const auto& s : fields) row.push_back(parse_number(s, "samples row"));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("no samples in " + path);
    ws.samples.resize(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) throw DataError("ragged samples CSV");
        for (size_t c = 0; c < rows[r].size(); ++c)
            ws.samples(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    }
    ws.support = model::BoxSupport(ws.samples.colwise().minCoeff(), ws.samples.colwise().maxCoeff());
    return ws;
}

}  // namespace wdrc::data
