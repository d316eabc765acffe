import pytest

from bgm.dataset import export_content, export_ratings
from bgm.errors import ConfigError
from bgm.synth import SynthConfig, SyntheticDataset, generate_synthetic


def small_config(**overrides):
    base = dict(
        users=24,
        source_items=30,
        target_items=36,
        clusters=3,
        cross_domain_correlation=0.9,
        noise_rate=0.1,
        source_ratings_per_user=10,
        target_ratings_per_user=12,
        seed=5,
    )
    base.update(overrides)
    return SynthConfig(**base)


def test_rating_scale_covers_a_liked_level_per_block_above_midpoint():
    config = small_config()
    assert config.rating_scale == 7
    assert [config.liked_rating(c) for c in range(3)] == [5, 6, 7]
    data = generate_synthetic(config)
    assert data.source_ratings.k == 7
    assert data.target_ratings.k == 7


def test_same_seed_reproduces_byte_identical_exports(tmp_path):
    first = generate_synthetic(small_config())
    second = generate_synthetic(small_config())
    assert first.source_ratings == second.source_ratings
    assert first.target_ratings == second.target_ratings
    assert first.source_content == second.source_content

    paths = []
    for tag, data in (("a", first), ("b", second)):
        ratings_path = tmp_path / f"{tag}_ratings.csv"
        content_path = tmp_path / f"{tag}_content.csv"
        export_ratings(data.target_ratings, str(ratings_path))
        export_content(data.target_content, str(content_path))
        paths.append((ratings_path, content_path))
    assert paths[0][0].read_bytes() == paths[1][0].read_bytes()
    assert paths[0][1].read_bytes() == paths[1][1].read_bytes()

    different = generate_synthetic(small_config(seed=6))
    assert different.source_ratings != first.source_ratings


def test_full_correlation_copies_the_cluster_assignment():
    data = generate_synthetic(small_config(cross_domain_correlation=1.0))
    assert data.user_target_cluster == data.user_source_cluster


def test_zero_correlation_never_copies_the_cluster_assignment():
    data = generate_synthetic(small_config(cross_domain_correlation=0.0))
    for user, cluster in data.user_source_cluster.items():
        assert data.user_target_cluster[user] != cluster


def test_noise_free_users_like_their_block_and_pan_elsewhere():
    config = small_config(
        noise_rate=0.0, intra_cluster_rating_probability=0.6
    )
    data = generate_synthetic(config)
    for user, cluster in data.user_source_cluster.items():
        liked = config.liked_rating(cluster)
        ratings = data.source_ratings.ratings_of_user(user)
        assert len(ratings) == config.source_ratings_per_user
        liked_items = [item for item, value in ratings.items() if value == liked]
        panned_items = [item for item, value in ratings.items() if value == 1]
        assert len(liked_items) == round(0.6 * config.source_ratings_per_user)
        assert len(liked_items) + len(panned_items) == len(ratings)
        for item in liked_items:
            assert data.source_item_cluster[item] == cluster
        for item in panned_items:
            assert data.source_item_cluster[item] != cluster


def test_pure_noise_keeps_only_the_rating_range():
    config = small_config(noise_rate=1.0)
    data = generate_synthetic(config)
    values = set(data.source_ratings.entries.values())
    assert values <= set(range(1, config.rating_scale + 1))
    for user in data.source_ratings.users():
        assert len(data.source_ratings.ratings_of_user(user)) <= config.source_ratings_per_user


def test_item_blocks_interleave_and_users_round_robin():
    data = generate_synthetic(small_config())
    assert data.source_item_cluster["s00"] == 0
    assert data.source_item_cluster["s01"] == 1
    assert data.source_item_cluster["s02"] == 2
    assert data.source_item_cluster["s03"] == 0
    users = sorted(data.user_source_cluster)
    assert users[0] == "u00"
    assert [data.user_source_cluster[u] for u in users[:6]] == [0, 1, 2, 0, 1, 2]


def test_noise_free_content_sits_exactly_on_cluster_centroids():
    config = small_config(feature_noise=0.0, source_feature_dim=4)
    data = generate_synthetic(config)
    assert data.source_content.dimension == 4
    for item, vector in data.source_content.features.items():
        cluster = data.source_item_cluster[item]
        expected = tuple(1.0 if i == cluster % 4 else 0.0 for i in range(4))
        assert vector == expected
    # target dimension falls back to the cluster count
    assert data.target_content.dimension == config.clusters


def test_preferred_target_items_is_the_users_target_block():
    data = generate_synthetic(small_config())
    user = sorted(data.user_target_cluster)[0]
    block = data.preferred_target_items(user)
    cluster = data.user_target_cluster[user]
    assert block
    for item in block:
        assert data.target_item_cluster[item] == cluster


def test_config_validation_messages():
    with pytest.raises(ConfigError):
        small_config(users=0)
    with pytest.raises(ConfigError):
        small_config(clusters=1)
    with pytest.raises(ConfigError):
        small_config(source_items=2)
    with pytest.raises(ConfigError):
        small_config(cross_domain_correlation=1.5)
    with pytest.raises(ConfigError):
        small_config(noise_rate=-0.1)
    with pytest.raises(ConfigError):
        small_config(intra_cluster_rating_probability=2.0)
    with pytest.raises(ConfigError):
        small_config(source_ratings_per_user=0)
    with pytest.raises(ConfigError):
        small_config(source_ratings_per_user=31)
    with pytest.raises(ConfigError):
        small_config(target_ratings_per_user=37)
    with pytest.raises(ConfigError):
        small_config(feature_noise=-0.5)
    with pytest.raises(ConfigError):
        small_config(target_feature_dim=0)
