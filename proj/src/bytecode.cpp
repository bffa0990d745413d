// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/bytecode.hpp>
#include <opdiff/detail/opcode_table.hpp>
#include <opdiff/errors.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

namespace opdiff
{
namespace
{
constexpr std::array<std::string_view, 11> fork_names = {
    "frontier", "homestead", "byzantium", "constantinople", "petersburg", "istanbul",
    "berlin", "london", "paris", "shanghai", "cancun",
};

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true)
    {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view s, size_t line)
{
    int base = 10;
    if (s.starts_with("0x"))
    {
        s.remove_prefix(2);
        base = 16;
    }
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw Error{"opcode table line " + std::to_string(line) + ": bad number '" + std::string{s} + "'"};
    return v;
}

const std::map<std::string, uint8_t, std::less<>>& mnemonic_index()
{
    static const auto index = [] {
        std::map<std::string, uint8_t, std::less<>> m;
        for (const auto& row : detail::builtin_table())
            if (row)
                m.emplace(row->info.mnemonic, row->info.byte);
        return m;
    }();
    return index;
}

std::string upper(std::string_view s)
{
    std::string out{s};
    std::ranges::transform(out, out.begin(), [](unsigned char c) { return std::toupper(c); });
    return out;
}
}  // namespace

namespace detail
{
std::vector<TableRow> parse_opcode_table(std::string_view text)
{
    std::vector<TableRow> rows;
    size_t line_no = 0;
    for (auto line : split(text, '\n'))
    {
        ++line_no;
        if (line.empty() || line.front() == '#')
            continue;
        const auto cols = split(line, '\t');
        if (cols.size() != 9)
            throw Error{"opcode table line " + std::to_string(line_no) + ": expected 9 columns"};
        TableRow row;
        row.info.byte = parse_number<uint8_t>(cols[0], line_no);
        row.info.mnemonic = std::string{cols[1]};
        row.info.pops = parse_number<uint8_t>(cols[2], line_no);
        row.info.pushes = parse_number<uint8_t>(cols[3], line_no);
        row.info.immediate_len = parse_number<uint8_t>(cols[4], line_no);
        row.info.introduced = parse_fork(cols[5]);
        row.info.defined = true;
        row.static_gas = parse_number<uint64_t>(cols[6], line_no);
        row.dynamic_rule = std::string{cols[7]};
        if (cols[8] != "-")
            for (const auto p : split(cols[8], ','))
                row.extra_paths.emplace_back(p);

        if (row.info.immediate_len > 32 || (row.info.immediate_len != 0) != is_push(row.info.byte))
            throw Error{"opcode table line " + std::to_string(line_no) + ": bad immediate length"};
        if (row.info.pops > 17 || row.info.pushes > 17)
            throw Error{"opcode table line " + std::to_string(line_no) + ": stack arity out of range"};
        rows.push_back(std::move(row));
    }
    return rows;
}

const std::array<std::optional<TableRow>, 256>& builtin_table()
{
    static const auto table = [] {
        std::array<std::optional<TableRow>, 256> t;
        for (auto& row : parse_opcode_table(opcode_table_text))
        {
            const auto byte = row.info.byte;
            if (t[byte])
                throw Error{"opcode table: duplicate byte " + std::to_string(byte)};
            t[byte] = std::move(row);
        }
        return t;
    }();
    return table;
}
}  // namespace detail

std::string_view fork_name(Fork fork) noexcept
{
    return fork_names[static_cast<size_t>(fork)];
}

Fork parse_fork(std::string_view name)
{
    std::string lower{name};
    std::ranges::transform(lower, lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (size_t i = 0; i < fork_names.size(); ++i)
        if (fork_names[i] == lower)
            return static_cast<Fork>(i);
    throw UnknownFork{"unknown fork: " + std::string{name}};
}

std::optional<OpInfo> opcode_info(uint8_t byte, Fork fork)
{
    const auto& row = detail::builtin_table()[byte];
    if (!row || row->info.introduced > fork)
        return std::nullopt;
    return row->info;
}

std::optional<OpInfo> opcode_info(uint8_t byte, std::string_view fork)
{
    return opcode_info(byte, parse_fork(fork));
}

const OpInfo& opcode_by_mnemonic(std::string_view mnemonic)
{
    const auto& index = mnemonic_index();
    const auto it = index.find(upper(mnemonic));
    if (it == index.end())
        throw UnknownMnemonic{"unknown mnemonic: " + std::string{mnemonic}};
    return detail::builtin_table()[it->second]->info;
}

std::vector<uint8_t> defined_opcodes(Fork fork)
{
    std::vector<uint8_t> out;
    for (unsigned b = 0; b < 256; ++b)
        if (opcode_info(static_cast<uint8_t>(b), fork))
            out.push_back(static_cast<uint8_t>(b));
    return out;
}

BytecodeProgram disassemble(std::span<const uint8_t> bytes, Fork fork)
{
    BytecodeProgram p;
    p.bytes_.assign(bytes.begin(), bytes.end());
    p.jumpdest_map_.assign(bytes.size(), false);

    size_t pc = 0;
    while (pc < bytes.size())
    {
        Instruction ins;
        ins.offset = pc;
        const auto byte = bytes[pc];
        if (auto info = opcode_info(byte, fork))
            ins.info = std::move(*info);
        else
        {
            ins.info = OpInfo{};
            ins.info.byte = byte;
        }

        const size_t imm_begin = pc + 1;
        const size_t imm_end = std::min(imm_begin + ins.info.immediate_len, bytes.size());
        ins.immediate.assign(bytes.begin() + static_cast<ptrdiff_t>(std::min(imm_begin, bytes.size())),
            bytes.begin() + static_cast<ptrdiff_t>(imm_end));
        ins.truncated = ins.immediate.size() < ins.info.immediate_len;

        if (byte == op::JUMPDEST && ins.info.defined)
        {
            p.jumpdests_.insert(pc);
            p.jumpdest_map_[pc] = true;
        }
        pc = imm_end;
        p.instrs_.push_back(std::move(ins));
    }
    return p;
}

BytecodeProgram assemble(const Listing& listing, Fork fork)
{
    Bytes out;
    for (const auto& entry : listing)
    {
        if (entry.mnemonic.starts_with("0x"))
        {
            const auto raw = from_hex(entry.mnemonic);
            if (!raw || raw->size() != 1 || entry.immediate)
                throw UnknownMnemonic{"bad raw byte: " + entry.mnemonic};
            out.push_back((*raw)[0]);
            continue;
        }
        const auto& info = opcode_by_mnemonic(entry.mnemonic);
        if (info.introduced > fork)
            throw UnknownMnemonic{entry.mnemonic + " is not defined at " + std::string{fork_name(fork)}};
        const size_t given = entry.immediate ? entry.immediate->size() : 0;
        if (given != info.immediate_len)
            throw ImmediateLengthMismatch{entry.mnemonic + " expects " +
                                          std::to_string(info.immediate_len) + " immediate bytes, got " +
                                          std::to_string(given)};
        out.push_back(info.byte);
        if (entry.immediate)
            out.insert(out.end(), entry.immediate->begin(), entry.immediate->end());
    }
    return disassemble(out, fork);
}

Listing to_listing(const BytecodeProgram& program)
{
    Listing listing;
    listing.reserve(program.instrs().size());
    for (const auto& ins : program.instrs())
    {
        ListingEntry e;
        if (ins.info.defined)
            e.mnemonic = ins.info.mnemonic;
        else
            e.mnemonic = "0x" + to_hex(std::span{&ins.info.byte, 1});
        if (ins.info.immediate_len > 0)
            e.immediate = ins.immediate;
        listing.push_back(std::move(e));
    }
    return listing;
}

std::string format_listing(const BytecodeProgram& program)
{
    std::string out;
    for (const auto& e : to_listing(program))
    {
        out += e.mnemonic;
        if (e.immediate)
            out += " 0x" + to_hex(*e.immediate);
        out += '\n';
    }
    return out;
}

Listing parse_listing(std::string_view text)
{
    Listing listing;
    std::istringstream in{std::string{text}};
    std::string line;
    while (std::getline(in, line))
    {
        std::istringstream fields{line};
        ListingEntry e;
        if (!(fields >> e.mnemonic))
            continue;
        std::string imm;
        if (fields >> imm)
        {
            auto bytes = from_hex(imm);
            if (!bytes)
                throw ImmediateLengthMismatch{"bad immediate: " + imm};
            e.immediate = std::move(*bytes);
        }
        listing.push_back(std::move(e));
    }
    return listing;
}

std::set<size_t> valid_jump_targets(const BytecodeProgram& program)
{
    return program.jumpdests();
}
}  // namespace opdiff
