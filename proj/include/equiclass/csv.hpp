#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "equiclass/errors.hpp"
#include "equiclass/model.hpp"

namespace equiclass {

/// RFC-4180 field quoting: quote when the value contains a comma, quote or newline.
inline std::string csv_quote(const std::string& value) {
    if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

/// RFC-4180 reader: quoted fields, doubled-quote escapes, CRLF or LF rows.
inline std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    char c;
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                row_started = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                row_started = true;
                break;
            case '\r':
                break;
            case '\n':
                if (row_started || !field.empty()) {
                    row.push_back(std::move(field));
                    field.clear();
                    rows.push_back(std::move(row));
                    row.clear();
                }
                row_started = false;
                break;
            default:
                field += c;
                row_started = true;
                break;
        }
    }
    if (row_started || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

struct ColumnSelection {
    std::vector<std::string> input_columns;
    std::vector<std::string> output_columns;
};

/**
 * Reads a header-bearing CSV into a validated table. Inputs and outputs are
 * selected by column name; object labels come from a column named "id" when
 * present, otherwise the first unselected column, otherwise the row number.
 */
inline CharacteristicTable ingest_csv(const std::string& path, const ColumnSelection& columns) {
    std::ifstream file(path);
    if (!file) throw Error("cannot open " + path);
    const auto rows = parse_csv(file);
    if (rows.empty()) throw ParseError(0, 0, "file has no header row");
    if (rows.size() < 2) throw ParseError(1, 0, "file has a header but no data rows");

    const std::vector<std::string>& header = rows.front();
    const auto column_index = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw MissingColumn("column '" + name + "' not found in header");
        return static_cast<int>(it - header.begin());
    };

    std::vector<int> input_idx, output_idx;
    for (const auto& name : columns.input_columns) input_idx.push_back(column_index(name));
    for (const auto& name : columns.output_columns) output_idx.push_back(column_index(name));

    int id_idx = -1;
    for (int j = 0; j < static_cast<int>(header.size()); ++j) {
        const bool used = std::find(input_idx.begin(), input_idx.end(), j) != input_idx.end() ||
                          std::find(output_idx.begin(), output_idx.end(), j) != output_idx.end();
        if (used) continue;
        if (header[static_cast<std::size_t>(j)] == "id") {
            id_idx = j;
            break;
        }
        if (id_idx < 0) id_idx = j;
    }

    const int T = static_cast<int>(rows.size()) - 1;
    CharacteristicTable table;
    table.inputs.resize(static_cast<Eigen::Index>(input_idx.size()), T);
    table.outputs.resize(static_cast<Eigen::Index>(output_idx.size()), T);

    const auto parse_number = [&](std::size_t row, int col) {
        const auto& cells = rows[row];
        if (col >= static_cast<int>(cells.size()))
            throw ParseError(row, static_cast<std::size_t>(col), "row is too short");
        const std::string& cell = cells[static_cast<std::size_t>(col)];
        try {
            std::size_t consumed = 0;
            const double value = std::stod(cell, &consumed);
            while (consumed < cell.size() && std::isspace(static_cast<unsigned char>(cell[consumed])))
                ++consumed;
            if (consumed != cell.size()) throw std::invalid_argument(cell);
            return value;
        } catch (const std::exception&) {
            throw ParseError(row, static_cast<std::size_t>(col), "not a number: '" + cell + "'");
        }
    };

    for (int t = 0; t < T; ++t) {
        const std::size_t row = static_cast<std::size_t>(t) + 1;
        for (std::size_t i = 0; i < input_idx.size(); ++i)
            table.inputs(static_cast<Eigen::Index>(i), t) = parse_number(row, input_idx[i]);
        for (std::size_t i = 0; i < output_idx.size(); ++i)
            table.outputs(static_cast<Eigen::Index>(i), t) = parse_number(row, output_idx[i]);
        if (id_idx >= 0 && id_idx < static_cast<int>(rows[row].size()))
            table.object_ids.push_back(rows[row][static_cast<std::size_t>(id_idx)]);
        else
            table.object_ids.push_back(std::to_string(t + 1));
    }
    validate_table(table);
    return table;
}

}  // namespace equiclass
