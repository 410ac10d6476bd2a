#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dpush/dmail.hpp"
#include "dpush/dpush.hpp"

namespace dpush {

// On-disk CLI state: keys.json, inbox.json, follows.json under one profile
// directory, every file canonical JSON. Private keys are stored in the
// clear unless a passphrase is supplied.
class Profile {
public:
    explicit Profile(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& dir() const { return dir_; }
    bool has_keys() const;

    void create_keys(const CryptoSuite& suite, const std::string& passphrase);
    SigKeypair load_keys(const std::string& passphrase) const;
    KeyId address(const std::string& passphrase) const;

    void save_inbox(const dmail::MailInbox& inbox);
    void save_inbox(const Mailbox& box);

    // Loads whichever kind the profile holds; follows.json is merged into
    // the returned mailbox.
    std::optional<dmail::MailInbox> load_mail_inbox() const;
    std::optional<Mailbox> load_plain_inbox() const;
    std::string inbox_kind() const;  // "", "dpush" or "dmail"

    std::optional<FollowChannel> load_own_channel() const;
    void save_own_channel(const FollowChannel& channel);

private:
    void save_follows(const Mailbox& box);
    void merge_follows(Mailbox& box) const;

    std::filesystem::path dir_;
};

// Advisory lock on <dir>/.lock; one CLI invocation at a time per profile.
class ProfileLock {
public:
    explicit ProfileLock(const std::filesystem::path& dir);
    ~ProfileLock();

    ProfileLock(const ProfileLock&) = delete;
    ProfileLock& operator=(const ProfileLock&) = delete;

private:
    int fd_ = -1;
};

}  // namespace dpush
