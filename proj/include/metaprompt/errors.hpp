#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace metaprompt {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(std::string message) : std::runtime_error(std::move(message)) {}
};

class UnknownTemplate : public Error {
public:
    explicit UnknownTemplate(const std::string& id)
        : Error("unknown template id: " + id), id_(id) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

class MissingSlot : public Error {
public:
    explicit MissingSlot(const std::string& slot)
        : Error("template does not declare slot \"" + slot + "\""), slot_(slot) {}
    const std::string& slot() const { return slot_; }

private:
    std::string slot_;
};

class AlreadyBound : public Error {
public:
    explicit AlreadyBound(const std::string& slot)
        : Error("slot \"" + slot + "\" already has a binding"), slot_(slot) {}
    const std::string& slot() const { return slot_; }

private:
    std::string slot_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error("parse error at line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class BackendError : public Error {
public:
    BackendError(int status, const std::string& body)
        : Error("backend error (status " + std::to_string(status) + "): " + body),
          status_(status),
          body_(body) {}
    int status() const { return status_; }
    const std::string& body() const { return body_; }

private:
    int status_;
    std::string body_;
};

class UnknownFingerprint : public Error {
public:
    explicit UnknownFingerprint(const std::string& fingerprint)
        : Error("no scripted response for fingerprint " + fingerprint), fingerprint_(fingerprint) {}
    const std::string& fingerprint() const { return fingerprint_; }

private:
    std::string fingerprint_;
};

class Timeout : public Error {
public:
    explicit Timeout(const std::string& detail) : Error("request timed out: " + detail) {}
};

class LengthMismatch : public Error {
public:
    LengthMismatch(std::size_t records, std::size_t verdicts)
        : Error("records/verdicts length mismatch: " + std::to_string(records) + " vs " +
                std::to_string(verdicts)) {}
};

class MissingColumn : public Error {
public:
    explicit MissingColumn(const std::string& column)
        : Error("input file lacks required column \"" + column + "\""), column_(column) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

class MalformedRow : public Error {
public:
    MalformedRow(std::size_t index, const std::string& raw)
        : Error("malformed row " + std::to_string(index) + ": \"" + raw + "\""), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

class MalformedRecord : public Error {
public:
    MalformedRecord(const std::string& where, const std::string& detail)
        : Error("malformed record at " + where + ": " + detail) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& detail) : Error(detail) {}
};

}  // namespace metaprompt
