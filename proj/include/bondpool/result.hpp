#pragma once

#include <cassert>
#include <new>
#include <utility>

namespace bondpool {

enum class Errc {
    domain,          // inputs outside the function's domain
    no_solution,     // no value satisfies the contract
    rejected_trade,  // trade violates operability or capacity limits
    halted,          // lending suspended by the solvency guard
    stale_quote,     // quote priced against an older pool state
    not_found,       // unknown or closed position id
    insolvent,       // pool cannot fund a settlement
    inconsistent,    // internal invariant violated
};

struct Error {
    Errc code;
    const char* message;
};

/// Value-or-error carrier. Rejected trades are ordinary control flow in the
/// trading loop, so errors are static-message codes rather than exceptions.
template <typename T>
class [[nodiscard]] Result {
public:
    Result(T value) : ok_(true) { new (&storage_.value) T(std::move(value)); }
    Result(Error err) : ok_(false) { storage_.error = err; }

    Result(const Result& other) : ok_(other.ok_) {
        if (ok_) new (&storage_.value) T(other.storage_.value);
        else storage_.error = other.storage_.error;
    }
    Result(Result&& other) noexcept : ok_(other.ok_) {
        if (ok_) new (&storage_.value) T(std::move(other.storage_.value));
        else storage_.error = other.storage_.error;
    }
    Result& operator=(const Result&) = delete;
    ~Result() {
        if (ok_) storage_.value.~T();
    }

    bool ok() const { return ok_; }
    explicit operator bool() const { return ok_; }

    const T& value() const {
        assert(ok_);
        return storage_.value;
    }
    T& value() {
        assert(ok_);
        return storage_.value;
    }
    const Error& error() const {
        assert(!ok_);
        return storage_.error;
    }

private:
    union Storage {
        T value;
        Error error;
        Storage() {}
        ~Storage() {}
    } storage_;
    bool ok_;
};

template <>
class [[nodiscard]] Result<void> {
public:
    Result() : ok_(true), error_{Errc::domain, ""} {}
    Result(Error err) : ok_(false), error_(err) {}

    bool ok() const { return ok_; }
    explicit operator bool() const { return ok_; }
    const Error& error() const {
        assert(!ok_);
        return error_;
    }

private:
    bool ok_;
    Error error_;
};

inline Error err(Errc code, const char* message) { return Error{code, message}; }

}  // namespace bondpool
